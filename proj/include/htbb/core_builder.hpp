#pragma once

#include <limits>
#include <vector>

#include "htbb/ht_tree.hpp"
#include "htbb/index_state.hpp"
#include "htbb/maxvol.hpp"
#include "htbb/oracle.hpp"

namespace htbb {

/// Core of a non-root node together with the orthonormal factor Q of its
/// value matrix V = Q R. The stored core is the interpolation matrix
/// P = V S^+, where S = Y[upper values, down values]; it reproduces V and
/// maps the node's upper values onto every index of its subtree.
///
/// S^+ is formed from the SVD of S. A singular direction w_k is dropped when
/// it is numerically null or when its coefficients max|V w_k| / sigma_k
/// exceed `max_coefficient`; an infinite bound keeps every nonzero direction.
struct BuiltNode {
    Core core;
    Matrix basis;
};

/// Leaf j: V[i, k] = f(mode j = i, down set = down value k); core (u x N_j)
/// with u the number of upper values.
BuiltNode build_leaf_core(Oracle& oracle, const IndexState& state, int leaf,
                          double max_coefficient = std::numeric_limits<double>::infinity());

/// Inner node: V[(i,n), k] over children upper values (i-major) and own down
/// values; core (u1 x u x u2) with core[i,m,n] = P[(i,n), m].
BuiltNode build_inner_core(Oracle& oracle, const IndexState& state, int node,
                           double max_coefficient = std::numeric_limits<double>::infinity());

/// Root: raw values Y[left upper values, right upper values], shape (u1 x 1 x u2).
Core build_root_core(Oracle& oracle, const IndexState& state);

/// All cores bottom-up. Cached values are reused; new ones draw on the budget.
HTTensor build_cores(Oracle& oracle, const IndexState& state,
                     double max_coefficient = std::numeric_limits<double>::infinity());

/// Every multi-index the builder reads for one node.
std::vector<MultiIndex> core_indices(const IndexState& state, int node);

}  // namespace htbb
