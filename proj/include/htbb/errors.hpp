#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace htbb {

enum class Errc {
    invalid_argument,
    invalid_dimension,
    inconsistent_cores,
    too_large,
    not_tall,
    numerical_degeneracy,
    rank_too_large,
    budget_exhausted,
    degenerate_block,
    no_root_link,
    infeasible_rank,
    unknown_benchmark,
    parse_error,
};

std::string_view to_string(Errc code) noexcept;

/// Library-wide exception carrying a machine-checkable error code.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    [[nodiscard]] Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

/// Raised when a new (uncached) evaluation is requested after the budget is spent.
class BudgetExhausted : public Error {
public:
    explicit BudgetExhausted(std::size_t budget)
        : Error(Errc::budget_exhausted, "evaluation budget of " + std::to_string(budget) + " spent") {}
};

}  // namespace htbb
