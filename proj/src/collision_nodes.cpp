#include "bspec/collision_nodes.hpp"

namespace bspec {

std::size_t collision_node_count(const KernelSpec& spec, TruncationMethod method,
                                 const QuadResolution& res) {
    if (method == TruncationMethod::classical) {
        const int n = even_up(res.angular);
        const std::size_t nb = spec.d == 2 ? static_cast<std::size_t>(n)
                                           : static_cast<std::size_t>(n) * (2 * n);
        return static_cast<std::size_t>(res.radial) * nb * nb;
    }
    return static_cast<std::size_t>(even_up(res.angular)) * res.radial * (2 * res.radial);
}

} // namespace bspec
