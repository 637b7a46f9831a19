/// @file tape.cpp
#include "geoflow/tape.h"

#include <stdexcept>

namespace geoflow::ad {

void Tape::backward(const std::vector<std::pair<Value, double>>& seeds) {
    for (auto& n : nodes) n.grad = 0.0;
    int top = -1;
    for (const auto& [v, g] : seeds) {
        if (v.tape != this) throw std::logic_error("Tape::backward: seed from another tape");
        nodes[static_cast<size_t>(v.idx)].grad += g;
        if (v.idx > top) top = v.idx;
    }
    int next_custom = static_cast<int>(customs_.size()) - 1;
    // Customs above the seed range cannot have received adjoints.
    while (next_custom >= 0 && customs_[static_cast<size_t>(next_custom)].trigger > top)
        --next_custom;
    for (int i = top; i >= 0; --i) {
        if (next_custom >= 0 && customs_[static_cast<size_t>(next_custom)].trigger == i) {
            customs_[static_cast<size_t>(next_custom)].fn(*this);
            --next_custom;
        }
        const Node& n = nodes[static_cast<size_t>(i)];
        if (n.grad == 0.0) continue;
        if (n.p1 >= 0) nodes[static_cast<size_t>(n.p1)].grad += n.d1 * n.grad;
        if (n.p2 >= 0) nodes[static_cast<size_t>(n.p2)].grad += n.d2 * n.grad;
    }
}

}  // namespace geoflow::ad
