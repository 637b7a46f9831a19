/// @file tape.h
/// @brief Scalar reverse-mode differentiation tape with fused multi-output nodes.
///
/// Scalar nodes carry at most two parents with precomputed local partials.
/// Whole-network evaluations (dense layers, derivative jets) enter the tape
/// as fused operations: their outputs are plain leaves and a captured closure
/// scatters output adjoints back to the operation's inputs and to external
/// parameter-gradient sinks. The closure fires when the backward sweep
/// reaches the operation's highest output index, which keeps the sweep a
/// single reverse pass over node indices.
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace geoflow::ad {

class Tape;

/// Handle to one scalar node on a tape. Null-tape handles are inert
/// placeholders so containers of Value can be sized before assignment.
struct Value {
    Tape* tape = nullptr;
    int idx = -1;

    double val() const;
};

class Tape {
  public:
    struct Node {
        double val;
        double grad;
        int p1, p2;      // parent indices, -1 when absent
        double d1, d2;   // local partials with respect to the parents
    };

    Value leaf(double v) {
        nodes.push_back({v, 0.0, -1, -1, 0.0, 0.0});
        return {this, static_cast<int>(nodes.size()) - 1};
    }
    Value unary(double v, int p, double d) {
        nodes.push_back({v, 0.0, p, -1, d, 0.0});
        return {this, static_cast<int>(nodes.size()) - 1};
    }
    Value binary(double v, int p1, double d1, int p2, double d2) {
        nodes.push_back({v, 0.0, p1, p2, d1, d2});
        return {this, static_cast<int>(nodes.size()) - 1};
    }

    /// Registers a fused operation's adjoint. `trigger` must be the highest
    /// node index the operation wrote; customs must be pushed in creation
    /// order (ascending trigger), which any forward pass does naturally.
    void push_custom(int trigger, std::function<void(Tape&)> backward) {
        customs_.push_back({trigger, std::move(backward)});
    }

    /// Reverse sweep with explicit seed gradients (grads reset first).
    void backward(const std::vector<std::pair<Value, double>>& seeds);
    /// Convenience: single seed with gradient 1.
    void backward_from(Value seed) { backward({{seed, 1.0}}); }

    double grad(Value v) const { return nodes[static_cast<size_t>(v.idx)].grad; }
    std::size_t size() const { return nodes.size(); }
    void reserve(std::size_t n) { nodes.reserve(n); }

    std::vector<Node> nodes;

  private:
    struct Custom {
        int trigger;
        std::function<void(Tape&)> fn;
    };
    std::vector<Custom> customs_;
};

inline double Value::val() const { return tape->nodes[static_cast<size_t>(idx)].val; }

// ------------------------------------------------------------------ ops

inline Value operator+(Value a, Value b) {
    return a.tape->binary(a.val() + b.val(), a.idx, 1.0, b.idx, 1.0);
}
inline Value operator+(Value a, double b) { return a.tape->unary(a.val() + b, a.idx, 1.0); }
inline Value operator+(double a, Value b) { return b + a; }

inline Value operator-(Value a, Value b) {
    return a.tape->binary(a.val() - b.val(), a.idx, 1.0, b.idx, -1.0);
}
inline Value operator-(Value a, double b) { return a.tape->unary(a.val() - b, a.idx, 1.0); }
inline Value operator-(double a, Value b) { return b.tape->unary(a - b.val(), b.idx, -1.0); }
inline Value operator-(Value a) { return a.tape->unary(-a.val(), a.idx, -1.0); }

inline Value operator*(Value a, Value b) {
    return a.tape->binary(a.val() * b.val(), a.idx, b.val(), b.idx, a.val());
}
inline Value operator*(Value a, double b) { return a.tape->unary(a.val() * b, a.idx, b); }
inline Value operator*(double a, Value b) { return b * a; }

inline Value operator/(Value a, Value b) {
    double bv = b.val();
    double q = a.val() / bv;
    return a.tape->binary(q, a.idx, 1.0 / bv, b.idx, -q / bv);
}
inline Value operator/(Value a, double b) { return a.tape->unary(a.val() / b, a.idx, 1.0 / b); }
inline Value operator/(double a, Value b) {
    double bv = b.val();
    return b.tape->unary(a / bv, b.idx, -a / (bv * bv));
}

inline Value& operator+=(Value& a, Value b) { a = a + b; return a; }
inline Value& operator-=(Value& a, Value b) { a = a - b; return a; }
inline Value& operator*=(Value& a, Value b) { a = a * b; return a; }

inline Value sqrt(Value a) {
    double s = std::sqrt(a.val());
    return a.tape->unary(s, a.idx, 0.5 / s);
}
inline Value tanh(Value a) {
    double t = std::tanh(a.val());
    return a.tape->unary(t, a.idx, 1.0 - t * t);
}
inline Value exp(Value a) {
    double e = std::exp(a.val());
    return a.tape->unary(e, a.idx, e);
}
inline Value log(Value a) { return a.tape->unary(std::log(a.val()), a.idx, 1.0 / a.val()); }
inline Value sin(Value a) { return a.tape->unary(std::sin(a.val()), a.idx, std::cos(a.val())); }
inline Value cos(Value a) { return a.tape->unary(std::cos(a.val()), a.idx, -std::sin(a.val())); }
inline Value abs(Value a) {
    double v = a.val();
    return a.tape->unary(std::fabs(v), a.idx, v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0));
}
inline Value pow(Value a, double p) {
    double v = a.val();
    return a.tape->unary(std::pow(v, p), a.idx, p * std::pow(v, p - 1.0));
}
/// max(a, floor): subgradient 1 at the tie so a clipped value keeps pressure
/// to move back above the floor.
inline Value clamp_min(Value a, double floor) {
    double v = a.val();
    return a.tape->unary(v >= floor ? v : floor, a.idx, v >= floor ? 1.0 : 0.0);
}

/// Plain-double twins so templated geometry code instantiates for both
/// scalar types via unqualified calls.
inline double clamp_min(double a, double floor) { return a >= floor ? a : floor; }
inline double value_of(double x) { return x; }
inline double value_of(Value x) { return x.val(); }

}  // namespace geoflow::ad
