#include "htbb/core_builder.hpp"

#include "htbb/errors.hpp"

namespace htbb {

namespace {


void place(MultiIndex& target, const std::vector<int>& modes, const MultiIndex& values) {
    for (std::size_t k = 0; k < modes.size(); ++k) target[modes[k]] = values[k];
}

// Y[rows x cols] for two value lists over complementary mode sets.
std::vector<MultiIndex> cross_indices(int dim, const std::vector<int>& row_set, const std::vector<MultiIndex>& rows,
                                      const std::vector<int>& col_set, const std::vector<MultiIndex>& cols) {
    std::vector<MultiIndex> out;
    out.reserve(rows.size() * cols.size());
    MultiIndex index(static_cast<std::size_t>(dim), 0);
    for (const auto& row : rows) {
        place(index, row_set, row);
        for (const auto& col : cols) {
            place(index, col_set, col);
            out.push_back(index);
        }
    }
    return out;
}

std::vector<MultiIndex> grid_values(int size) {
    std::vector<MultiIndex> out;
    for (int k = 0; k < size; ++k) out.push_back({k});
    return out;
}

Matrix fill(Oracle& oracle, const std::vector<MultiIndex>& indices, Eigen::Index rows, Eigen::Index cols) {
    const auto values = oracle.evaluate_batch(indices);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = values[static_cast<std::size_t>(i * cols + j)];
    return m;
}

// P = V S^+ through the SVD S = U diag(sigma) W^T. Directions that are
// numerically null or whose coefficients max|V w_k| / sigma_k exceed
// max_coefficient are dropped.
Matrix interpolation(const Matrix& v, const Matrix& s, double max_coefficient) {
    Eigen::JacobiSVD<Matrix> svd(s, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sigma = svd.singularValues();
    Matrix p = Matrix::Zero(v.rows(), s.rows());
    if (sigma.size() == 0 || !(sigma(0) > 0.0)) return p;
    const Matrix vw = v * svd.matrixV();
    for (Eigen::Index k = 0; k < sigma.size(); ++k) {
        if (sigma(k) <= 1e-14 * sigma(0)) break;
        const Eigen::VectorXd column = vw.col(k) / sigma(k);
        if (column.cwiseAbs().maxCoeff() > max_coefficient) continue;
        p += column * svd.matrixU().col(k).transpose();
    }
    return p;
}

// Q factor of a thin unpivoted QR.
Matrix orthonormal_basis(const Matrix& v) {
    const Eigen::Index k = std::min(v.rows(), v.cols());
    Eigen::HouseholderQR<Matrix> qr(v);
    return qr.householderQ() * Matrix::Identity(v.rows(), k);
}

BuiltNode unit_node(std::vector<std::size_t> shape) {
    BuiltNode out{Core(std::move(shape)), Matrix::Ones(1, 1)};
    out.core.values.assign(out.core.values.size(), 1.0);
    return out;
}

}  // namespace

std::vector<MultiIndex> core_indices(const IndexState& state, int node) {
    const auto& topo = state.topology();
    const auto& n = topo.node(node);
    if (!n.active) return {};
    const int d = topo.dim();
    if (node == topo.root()) {
        const int l = n.children[0], r = n.children[1];
        return cross_indices(d, state.upper_set(l), state.upper_values(l), state.upper_set(r), state.upper_values(r));
    }
    if (n.is_leaf())
        return cross_indices(d, {n.mode}, grid_values(topo.mode_size(n.mode)), state.down_set(node),
                             state.down_values(node));
    const int c1 = n.children[0], c2 = n.children[1];
    std::vector<int> inner_set;
    std::vector<MultiIndex> inner_values;
    {
        const auto& s1 = state.upper_set(c1);
        const auto& s2 = state.upper_set(c2);
        for (const auto& a : state.upper_values(c1))
            for (const auto& b : state.upper_values(c2)) {
                MultiIndex joined = a;
                joined.insert(joined.end(), b.begin(), b.end());
                inner_values.push_back(std::move(joined));
            }
        inner_set = s1;
        inner_set.insert(inner_set.end(), s2.begin(), s2.end());
    }
    auto out = cross_indices(d, inner_set, inner_values, state.down_set(node), state.down_values(node));
    auto s = cross_indices(d, state.upper_set(node), state.upper_values(node), state.down_set(node),
                           state.down_values(node));
    out.insert(out.end(), std::make_move_iterator(s.begin()), std::make_move_iterator(s.end()));
    return out;
}

BuiltNode build_leaf_core(Oracle& oracle, const IndexState& state, int leaf, double max_coefficient) {
    const auto& topo = state.topology();
    const auto& n = topo.node(leaf);
    if (!n.is_leaf()) throw Error(Errc::invalid_argument, "node " + std::to_string(leaf) + " is not a leaf");
    if (!n.active) return unit_node({1, 1});

    const int size = topo.mode_size(n.mode);
    const auto& down = state.down_values(leaf);
    const Matrix v = fill(oracle, core_indices(state, leaf), size, static_cast<Eigen::Index>(down.size()));

    const auto& upper = state.upper_values(leaf);
    Matrix s(static_cast<Eigen::Index>(upper.size()), v.cols());
    for (std::size_t a = 0; a < upper.size(); ++a) s.row(static_cast<Eigen::Index>(a)) = v.row(upper[a][0]);
    const Matrix p = interpolation(v, s, max_coefficient);

    BuiltNode out{Core({static_cast<std::size_t>(p.cols()), static_cast<std::size_t>(size)}), orthonormal_basis(v)};
    for (Eigen::Index a = 0; a < p.cols(); ++a)
        for (Eigen::Index i = 0; i < size; ++i) out.core(a, i) = p(i, a);
    return out;
}

BuiltNode build_inner_core(Oracle& oracle, const IndexState& state, int node, double max_coefficient) {
    const auto& topo = state.topology();
    const auto& n = topo.node(node);
    if (n.is_leaf() || node == topo.root())
        throw Error(Errc::invalid_argument, "node " + std::to_string(node) + " is not an inner node");
    if (!n.active) return unit_node({1, 1, 1});

    const auto u1 = static_cast<Eigen::Index>(state.upper_values(n.children[0]).size());
    const auto u2 = static_cast<Eigen::Index>(state.upper_values(n.children[1]).size());
    const auto r = static_cast<Eigen::Index>(state.down_values(node).size());
    const auto u = static_cast<Eigen::Index>(state.upper_values(node).size());
    if (r > u1 * u2)
        throw Error(Errc::infeasible_rank, "rank " + std::to_string(r) + " exceeds " + std::to_string(u1 * u2));

    const auto values = oracle.evaluate_batch(core_indices(state, node));
    Matrix v(u1 * u2, r);
    for (Eigen::Index row = 0; row < v.rows(); ++row)
        for (Eigen::Index k = 0; k < r; ++k) v(row, k) = values[static_cast<std::size_t>(row * r + k)];
    const std::size_t offset = static_cast<std::size_t>(u1 * u2 * r);
    Matrix s(u, r);
    for (Eigen::Index a = 0; a < u; ++a)
        for (Eigen::Index k = 0; k < r; ++k) s(a, k) = values[offset + static_cast<std::size_t>(a * r + k)];

    const Matrix p = interpolation(v, s, max_coefficient);

    BuiltNode out{Core({static_cast<std::size_t>(u1), static_cast<std::size_t>(u), static_cast<std::size_t>(u2)}),
                  orthonormal_basis(v)};
    for (Eigen::Index i = 0; i < u1; ++i)
        for (Eigen::Index m = 0; m < u; ++m)
            for (Eigen::Index j = 0; j < u2; ++j) out.core(i, m, j) = p(i * u2 + j, m);
    return out;
}

Core build_root_core(Oracle& oracle, const IndexState& state) {
    const auto& topo = state.topology();
    const auto& root = topo.node(topo.root());
    if (root.is_leaf()) throw Error(Errc::invalid_argument, "root must have children");
    const auto ul = static_cast<Eigen::Index>(state.upper_values(root.children[0]).size());
    const auto ur = static_cast<Eigen::Index>(state.upper_values(root.children[1]).size());
    const Matrix y = fill(oracle, core_indices(state, topo.root()), ul, ur);
    Core core({static_cast<std::size_t>(ul), 1, static_cast<std::size_t>(ur)});
    for (Eigen::Index i = 0; i < ul; ++i)
        for (Eigen::Index j = 0; j < ur; ++j) core(i, 0, j) = y(i, j);
    return core;
}

HTTensor build_cores(Oracle& oracle, const IndexState& state, double max_coefficient) {
    const auto& topo = state.topology();
    std::vector<Core> cores(static_cast<std::size_t>(topo.size()));
    for (int id : topo.bottom_up()) {
        const auto& n = topo.node(id);
        if (id == topo.root())
            cores[id] = build_root_core(oracle, state);
        else
            cores[id] = (n.is_leaf() ? build_leaf_core(oracle, state, id, max_coefficient)
                                         : build_inner_core(oracle, state, id, max_coefficient))
                            .core;
    }
    return HTTensor(topo, std::move(cores));
}

}  // namespace htbb
