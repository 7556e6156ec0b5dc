#include "htbb/index_state.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "htbb/errors.hpp"

namespace htbb {

namespace {

std::vector<int> set_union_sorted(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

std::vector<int> positions_in(const std::vector<int>& subset, const std::vector<int>& set) {
    std::vector<int> out;
    out.reserve(subset.size());
    for (int mode : subset)
        out.push_back(static_cast<int>(std::lower_bound(set.begin(), set.end(), mode) - set.begin()));
    return out;
}

MultiIndex restrict(const MultiIndex& point, const std::vector<int>& modes) {
    MultiIndex out;
    out.reserve(modes.size());
    for (int mode : modes) out.push_back(point[mode]);
    return out;
}

MultiIndex random_vector(const std::vector<int>& modes, std::span<const int> sizes, Rng& rng) {
    MultiIndex out;
    out.reserve(modes.size());
    for (int mode : modes) out.push_back(std::uniform_int_distribution<int>(0, sizes[mode] - 1)(rng));
    return out;
}

// Resizes `values` to `size`: keeps entries in `order` when shrinking,
// appends distinct random vectors when growing (as many as exist).
void fit_counterpart(std::vector<MultiIndex>& values, std::size_t size, const std::vector<int>& order,
                     const std::vector<int>& modes, std::span<const int> sizes, Rng& rng) {
    if (values.size() > size) {
        std::vector<MultiIndex> kept;
        kept.reserve(size);
        for (int column : order) {
            if (kept.size() == size) break;
            kept.push_back(values[static_cast<std::size_t>(column)]);
        }
        values = std::move(kept);
        return;
    }
    std::set<MultiIndex> present(values.begin(), values.end());
    const std::size_t available = capped_volume(
        [&] {
            std::vector<int> s;
            for (int mode : modes) s.push_back(sizes[mode]);
            return s;
        }(),
        size);
    const std::size_t target = std::min(size, available);
    while (values.size() < target) {
        MultiIndex candidate = random_vector(modes, sizes, rng);
        if (present.insert(candidate).second) values.push_back(std::move(candidate));
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Index sets and state

std::vector<LinkState> init_index_sets(const TreeTopology& topology) {
    std::vector<LinkState> links(static_cast<std::size_t>(topology.size()));
    std::vector<int> all(static_cast<std::size_t>(topology.dim()));
    std::iota(all.begin(), all.end(), 0);
    for (int id = 0; id < topology.size(); ++id) {
        auto& link = links[id];
        link.upper_set = topology.upper_modes(id);
        std::set_difference(all.begin(), all.end(), link.upper_set.begin(), link.upper_set.end(),
                            std::back_inserter(link.down_set));
    }
    return links;
}

IndexState::IndexState(TreeTopology topology)
    : topology_(std::move(topology)), links_(init_index_sets(topology_)) {
    for (int id = 0; id < topology_.size(); ++id)
        if (!topology_.node(id).active) links_[id].upper = empty_values_;
}

IndexState IndexState::nested(TreeTopology topology, int r0, Rng& rng) {
    if (r0 < 1) throw Error(Errc::invalid_argument, "initial rank must be >= 1");
    IndexState state(std::move(topology));
    const auto& topo = state.topology_;
    const int d = topo.dim();
    for (int mode = 0; mode < d; ++mode)
        if (topo.mode_size(mode) < r0)
            throw Error(Errc::rank_too_large, "rank " + std::to_string(r0) + " exceeds mode " +
                                                  std::to_string(mode) + " size " +
                                                  std::to_string(topo.mode_size(mode)));

    std::vector<MultiIndex> points(static_cast<std::size_t>(r0), MultiIndex(static_cast<std::size_t>(d)));
    for (int mode = 0; mode < d; ++mode) {
        std::vector<int> perm(static_cast<std::size_t>(topo.mode_size(mode)));
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        for (int k = 0; k < r0; ++k) points[k][mode] = perm[k];
    }
    for (int id = 0; id < topo.size(); ++id) {
        if (id == topo.root() || !topo.node(id).active) continue;
        auto& link = state.links_[id];
        link.upper.clear();
        for (const auto& p : points) link.upper.push_back(restrict(p, link.upper_set));
        if (!state.mirrored(id))
            for (const auto& p : points) link.down.push_back(restrict(p, link.down_set));
    }
    return state;
}

const LinkState& IndexState::link(int id) const { return links_.at(static_cast<std::size_t>(id)); }
LinkState& IndexState::link(int id) { return links_.at(static_cast<std::size_t>(id)); }

bool IndexState::mirrored(int id) const { return topology_.node(id).parent == topology_.root(); }

const std::vector<MultiIndex>& IndexState::upper_values(int id) const {
    if (!topology_.node(id).active) return empty_values_;
    return link(id).upper;
}

const std::vector<MultiIndex>& IndexState::down_values(int id) const {
    if (id == topology_.root()) return empty_values_;
    if (mirrored(id)) return upper_values(topology_.sibling(id));
    return link(id).down;
}

void IndexState::validate() const {
    const auto fail = [](int id, const std::string& why) {
        throw Error(Errc::inconsistent_cores, "link " + std::to_string(id) + ": " + why);
    };
    const auto sizes = topology_.mode_sizes();
    const auto check_values = [&](int id, const std::vector<MultiIndex>& values, const std::vector<int>& modes) {
        if (values.empty()) fail(id, "empty value list");
        std::set<MultiIndex> distinct;
        for (const auto& value : values) {
            if (value.size() != modes.size()) fail(id, "value length does not match its set");
            for (std::size_t k = 0; k < modes.size(); ++k)
                if (value[k] < 0 || value[k] >= sizes[modes[k]]) fail(id, "value out of range");
            if (!distinct.insert(value).second) fail(id, "duplicate value");
        }
    };
    for (int id = 0; id < topology_.size(); ++id) {
        if (id == topology_.root() || !topology_.node(id).active) continue;
        const auto& l = link(id);
        if (l.upper_set.size() + l.down_set.size() != static_cast<std::size_t>(topology_.dim()))
            fail(id, "sets do not partition the modes");
        check_values(id, l.upper, l.upper_set);
        if (!mirrored(id)) check_values(id, l.down, l.down_set);
    }
}

// ---------------------------------------------------------------------------
// Update inputs

UpdateInputs gather_inputs(const IndexState& state, int node, Direction direction) {
    const auto& topo = state.topology();
    if (node == topo.root())
        throw Error(Errc::no_root_link, "the root has no link to update");
    if (!topo.node(node).active) throw Error(Errc::invalid_argument, "inactive links are never updated");

    UpdateInputs in;
    if (direction == Direction::up) {
        const auto& n = topo.node(node);
        if (n.is_leaf()) {
            in.i1 = {n.mode};
            for (int k = 0; k < topo.mode_size(n.mode); ++k) in.v1.push_back({k});
            in.v2 = {MultiIndex{}};
        } else {
            const int c1 = n.children[0], c2 = n.children[1];
            in.i1 = state.upper_set(c1);
            in.v1 = state.upper_values(c1);
            in.i2 = state.upper_set(c2);
            in.v2 = state.upper_values(c2);
        }
        in.i = state.down_set(node);
        in.v = state.down_values(node);
    } else {
        const int parent = topo.node(node).parent;
        const int sibling = topo.sibling(node);
        if (parent == topo.root()) {
            in.v1 = {MultiIndex{}};
        } else {
            in.i1 = state.down_set(parent);
            in.v1 = state.down_values(parent);
        }
        in.i2 = state.upper_set(sibling);
        in.v2 = state.upper_values(sibling);
        in.i = state.upper_set(node);
        in.v = state.upper_values(node);
    }
    return in;
}

std::vector<MultiIndex> update_indices(const UpdateInputs& in, int dim) {
    std::vector<MultiIndex> out;
    out.reserve(in.v1.size() * in.v2.size() * in.v.size());
    MultiIndex j(static_cast<std::size_t>(dim), 0);
    for (const auto& a : in.v1) {
        for (std::size_t k = 0; k < in.i1.size(); ++k) j[in.i1[k]] = a[k];
        for (const auto& b : in.v2) {
            for (std::size_t k = 0; k < in.i2.size(); ++k) j[in.i2[k]] = b[k];
            for (const auto& c : in.v) {
                for (std::size_t k = 0; k < in.i.size(); ++k) j[in.i[k]] = c[k];
                out.push_back(j);
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Transform and update

void apply_transform(TransformKind kind, Matrix& values) {
    if (kind == TransformKind::identity || values.size() == 0) return;
    const double mean = values.mean();
    const double variance = (values.array() - mean).square().mean();
    double sigma = std::sqrt(variance);
    if (sigma < 1e-12) sigma = 1.0;
    const double sign = kind == TransformKind::exp_min ? -1.0 : 1.0;
    values = ((values.array() - mean) * (sign / sigma)).exp().matrix();
}

namespace {

void check_partition(const UpdateInputs& in, int dim) {
    if (in.v.empty() || in.v1.empty() || in.v2.empty())
        throw Error(Errc::invalid_argument, "update needs non-empty value lists");
    std::vector<int> all = in.i;
    all.insert(all.end(), in.i1.begin(), in.i1.end());
    all.insert(all.end(), in.i2.begin(), in.i2.end());
    std::sort(all.begin(), all.end());
    const bool partition =
        static_cast<int>(all.size()) == dim && std::adjacent_find(all.begin(), all.end()) == all.end();
    if (!partition) throw Error(Errc::invalid_argument, "i, i1, i2 must partition the modes");
}

// The transformed (r1 r2) x r block of an update.
Matrix value_block(Oracle& oracle, const UpdateInputs& in, TransformKind transform) {
    check_partition(in, oracle.dim());
    const std::size_t r = in.v.size();
    const auto raw = oracle.evaluate_batch(update_indices(in, oracle.dim()));
    Matrix a(static_cast<Eigen::Index>(in.v1.size() * in.v2.size()), static_cast<Eigen::Index>(r));
    for (Eigen::Index row = 0; row < a.rows(); ++row)
        for (Eigen::Index col = 0; col < a.cols(); ++col) a(row, col) = raw[row * r + col];
    if (a.isZero(0.0)) throw Error(Errc::degenerate_block, "value block is all zeros");
    apply_transform(transform, a);
    return a;
}

// Number of leading diagonal entries of R with |R_nn| >= eps * lead.
int numerical_rank(const Matrix& r, double lead, double eps) {
    int n = 0;
    while (n < r.rows() && std::abs(r(n, n)) >= eps * lead) ++n;
    return n;
}

MultiIndex row_value(const UpdateInputs& in, int row, const std::vector<int>& set) {
    const std::size_t r2 = in.v2.size();
    const auto& a1 = in.v1[static_cast<std::size_t>(row) / r2];
    const auto& a2 = in.v2[static_cast<std::size_t>(row) % r2];
    const auto p1 = positions_in(in.i1, set);
    const auto p2 = positions_in(in.i2, set);
    MultiIndex value(set.size());
    for (std::size_t t = 0; t < p1.size(); ++t) value[p1[t]] = a1[t];
    for (std::size_t t = 0; t < p2.size(); ++t) value[p2[t]] = a2[t];
    return value;
}

UpdateResult select_rows(const UpdateInputs& in, const Matrix& a, int dr, double eps,
                         const std::vector<MultiIndex>* keep, double bound) {
    const PivotedQR qr = qr_pivoted(a);
    const double lead = std::abs(qr.r(0, 0));
    if (!(lead > 0.0) || !std::isfinite(lead)) throw Error(Errc::degenerate_block, "value block has no usable pivot");

    UpdateResult result;
    result.set = set_union_sorted(in.i1, in.i2);
    result.r_eps = numerical_rank(qr.r, lead, eps);
    result.truncated = result.r_eps < static_cast<int>(in.v.size());
    result.column_order = qr.perm;

    if (keep != nullptr && !result.truncated && keep->size() == in.v.size()) {
        std::vector<int> rows;
        for (const auto& value : *keep)
            for (Eigen::Index row = 0; row < a.rows(); ++row)
                if (row_value(in, static_cast<int>(row), result.set) == value) {
                    rows.push_back(static_cast<int>(row));
                    break;
                }
        if (rows.size() == keep->size()) {
            const PivotedQR sub = qr_pivoted(a(rows, Eigen::all));
            if (numerical_rank(sub.r, lead, eps) == static_cast<int>(rows.size())) {
                const Matrix q = qr.q.leftCols(result.r_eps);
                const Matrix coefficients = q * q(rows, Eigen::all).inverse();
                if (coefficients.cwiseAbs().maxCoeff() <= bound) {
                    result.values = *keep;
                    return result;
                }
            }
        }
    }

    const int growth = result.truncated ? 0 : dr;
    for (int row : maxvol_rect(qr.q.leftCols(result.r_eps), growth))
        result.values.push_back(row_value(in, row, result.set));
    return result;
}

}  // namespace

UpdateResult update_index_values(Oracle& oracle, const UpdateInputs& in, int dr, double eps,
                                 TransformKind transform) {
    return select_rows(in, value_block(oracle, in, transform), dr, eps, nullptr, 0.0);
}

UpdateResult check_index_values(Oracle& oracle, const UpdateInputs& in, const std::vector<MultiIndex>& current,
                                double eps, TransformKind transform, double bound) {
    return select_rows(in, value_block(oracle, in, transform), 0, eps, &current, bound);
}

void apply_update(IndexState& state, int node, Direction direction, const UpdateResult& result, Rng& rng) {
    const auto& topo = state.topology();
    const auto sizes = topo.mode_sizes();
    auto& link = state.link(node);
    if (result.truncated) link.frozen = true;

    // Grown rows come last; drop those the counterpart set cannot match.
    std::vector<MultiIndex> values = result.values;
    if (!state.mirrored(node)) {
        const auto& other = direction == Direction::up ? link.down_set : link.upper_set;
        std::vector<int> other_sizes;
        for (int mode : other) other_sizes.push_back(sizes[mode]);
        values.resize(std::min(values.size(), capped_volume(other_sizes, values.size())));
    }

    if (direction == Direction::up) {
        link.upper = std::move(values);
        if (!state.mirrored(node))
            fit_counterpart(link.down, link.upper.size(), result.column_order, link.down_set, sizes, rng);
        return;
    }
    if (state.mirrored(node)) {
        state.link(topo.sibling(node)).upper = std::move(values);
        return;
    }
    link.down = std::move(values);
    fit_counterpart(link.upper, link.down.size(), result.column_order, link.upper_set, sizes, rng);
}

}  // namespace htbb
