#include "htbb/errors.hpp"

namespace htbb {

std::string_view to_string(Errc code) noexcept {
    switch (code) {
        case Errc::invalid_argument: return "invalid-argument";
        case Errc::invalid_dimension: return "invalid-dimension";
        case Errc::inconsistent_cores: return "inconsistent-cores";
        case Errc::too_large: return "too-large";
        case Errc::not_tall: return "not-tall";
        case Errc::numerical_degeneracy: return "numerical-degeneracy";
        case Errc::rank_too_large: return "rank-too-large";
        case Errc::budget_exhausted: return "budget-exhausted";
        case Errc::degenerate_block: return "degenerate-block";
        case Errc::no_root_link: return "no-root-link";
        case Errc::infeasible_rank: return "infeasible-rank";
        case Errc::unknown_benchmark: return "unknown-benchmark";
        case Errc::parse_error: return "parse-error";
    }
    return "unknown";
}

}  // namespace htbb
