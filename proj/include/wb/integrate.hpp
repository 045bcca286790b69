#pragma once

// Integration of motivic (exponential) functions against Haar measure on VF
// coordinates (the valuation ring has mass 1) and counting measure on RF and
// ZZ coordinates, with integrability and boundedness probes.

#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "wb/motivic.hpp"

namespace wb {

using Integrand = std::variant<MotivicFunction, MotivicExpFunction>;

struct IntegrationOptions {
    std::int64_t vmin = -5; ///< valuation slices of every VF coordinate
    std::int64_t vmax = 15;
    int depth = 2;           ///< digits fixed per VF cell
    std::int64_t zmin = -20; ///< slices of every ZZ coordinate
    std::int64_t zmax = 20;
    std::int64_t budget = 5000000; ///< cells; WB_BUDGET_CELLS lowers it further
    int tail_k = 5;
    double tail_eps = 0.01;
    double tail_rmax = 0.9;
    std::int64_t twist = 1;
    SearchBox eval_box; ///< windows for quantifiers inside formulas

    std::string to_string() const;
};

/// Throws DomainError for empty ranges, a depth outside [1, N], tail_k < 2 or
/// a twist that is not a unit.
void validate(const FieldDesc& fd, const IntegrationOptions& opts);

/// opts.budget, capped by the WB_BUDGET_CELLS environment variable when set.
std::int64_t effective_budget(const IntegrationOptions& opts);

/// Exact value in a cyclotomic field, or a float once a float tail or an
/// inexact inner result entered the sum.
struct Num {
    bool exact = true;
    Cyclo value;
    std::complex<double> approx;

    static Num of(Cyclo c) { return Num{true, std::move(c), {}}; }
    std::complex<double> to_complex() const { return exact ? value.to_complex() : approx; }
    bool is_zero() const { return exact ? value.is_zero() : approx == std::complex<double>(); }
    /// Exact values print as "5/6" or a root-of-unity combination, floats as
    /// "re" or "re+imi" with 17 significant digits.
    std::string to_string() const;

    Num& operator+=(const Num& o);
    Num operator*(const mpq_class& s) const;
};

std::string format_double(double x);

enum class TailStatus { ResolvedGeometric, Truncated, DivergentSuspected };
std::string_view tail_status_name(TailStatus s);

/// Extrapolation of the slices beyond one end of a coordinate window.
struct TailInfo {
    TailStatus status = TailStatus::Truncated;
    int order = 0;     ///< order of the detected linear recurrence, 0 when none
    std::string ratio; ///< common ratio, or largest root modulus when order > 1
    Num extra;         ///< value added beyond the window
};

struct IntegralResult {
    Num value;
    TailStatus status = TailStatus::ResolvedGeometric; ///< worst status over all coordinates
    /// Slices of the first indexed coordinate (valuation or integer value).
    std::vector<std::pair<std::int64_t, Num>> slices;
    std::optional<TailInfo> upper_tail;
    std::optional<TailInfo> lower_tail;
    std::int64_t cells = 0;
    std::int64_t unknown_cells = 0;
    double unknown_mass = 0; ///< total mass of cells left out as Unknown
    std::vector<std::string> notes;
};

/// Integral of f over {vars : domain} with the variables of `base` held
/// fixed. A null domain means the whole space. VF coordinates are summed
/// slice by slice over the cells of enumerate_ball (a cell at valuation v
/// fixing `depth` digits has mass p^-(v + depth)); each window end is
/// extrapolated from the last tail_k slices when they form a geometric
/// sequence with ratio below tail_rmax; exact rational slices may instead
/// satisfy a short linear recurrence whose roots lie below tail_rmax. Cell
/// representatives carry only `depth` digits, so cells whose domain
/// membership or value depends on finer digits are Unknown; they are skipped
/// and reported. Throws ResourceError when the cell budget is exceeded.
IntegralResult integrate(const FieldDesc& fd, const Integrand& f, const Formula* domain,
                         const std::vector<VarDecl>& vars, const Assignment& base, const IntegrationOptions& opts);

enum class IntegrabilityKind { LikelyIntegrable, LikelyDivergent, Inconclusive };
std::string_view integrability_name(IntegrabilityKind k);

/// Growth of the integral of |f| in one direction: increment n is the mass
/// added when the box grows by one step at that end.
struct DirectionEvidence {
    std::string direction; ///< "upper" or "lower"
    IntegrabilityKind kind = IntegrabilityKind::Inconclusive;
    std::vector<double> increments;
    std::vector<double> ratios; ///< of the last tail_k increments
};

struct IntegrabilityVerdict {
    IntegrabilityKind kind = IntegrabilityKind::Inconclusive;
    std::vector<double> partial_sums; ///< integral of |f| over boxes growing upward
    DirectionEvidence upper;
    DirectionEvidence lower;
    std::int64_t cells = 0;
    std::int64_t unknown_cells = 0;
};

/// Classifies the partial integrals of |f| over growing boxes. A direction is
/// integrable when its last increments vanish or all their ratios stay below
/// 1 - tail_eps, divergent when all ratios are at least 1. The verdict is
/// LikelyDivergent if some direction is, LikelyIntegrable if both are.
IntegrabilityVerdict check_integrable(const FieldDesc& fd, const Integrand& f, const Formula* domain,
                                      const std::vector<VarDecl>& vars, const Assignment& base,
                                      const IntegrationOptions& opts);

/// |value| as an exact rational when the value is rational, else a float.
struct Magnitude {
    std::optional<mpq_class> exact;
    double approx = 0;
    std::string to_string() const;
    friend bool operator<(const Magnitude& a, const Magnitude& b);
};

struct BoundednessResult {
    bool unbounded_suspected = false;
    Magnitude sup;
    std::optional<Assignment> witness; ///< argmax cell representative
    std::vector<std::pair<std::int64_t, Magnitude>> upper_maxima; ///< by largest index of a cell
    std::vector<std::pair<std::int64_t, Magnitude>> lower_maxima; ///< by smallest index of a cell
    std::int64_t cells = 0;
    std::int64_t unknown_cells = 0;
};

/// Exact maximum of |f| over the enumerated cells. Unbounded is suspected
/// when the maxima strictly increase over the last tail_k steps toward
/// either end of the window.
BoundednessResult check_bounded(const FieldDesc& fd, const Integrand& f, const Formula* domain,
                                const std::vector<VarDecl>& vars, const Assignment& base,
                                const IntegrationOptions& opts);

/// Integral over `vars` of f(base, .) after check_integrable accepted it.
class NotIntegrableError : public Error {
public:
    explicit NotIntegrableError(IntegrabilityVerdict v)
        : Error(std::string("integrand is not likely integrable: ") + std::string(integrability_name(v.kind))),
          verdict_(std::move(v)) {}
    const IntegrabilityVerdict& verdict() const noexcept { return verdict_; }
    const char* kind() const noexcept override { return "not-integrable"; }

private:
    IntegrabilityVerdict verdict_;
};

IntegralResult integrate_out(const FieldDesc& fd, const Integrand& f, const Formula* domain,
                             const std::vector<VarDecl>& vars, const Assignment& base,
                             const IntegrationOptions& opts);

/// Visits every cell of the product box: VF cells of [vmin, vmax] at
/// `depth`, all of F_p, and [zmin, zmax]. `fn` receives the assignment, the
/// cell mass, the verdict of the domain and, for True cells, the value
/// (nullopt when evaluation failed). Throws ResourceError past the budget.
struct CellVisit {
    const Assignment& point;
    const std::vector<std::int64_t>& indices; ///< valuation or integer value per indexed coordinate
    double mass;
    Truth member;
    const std::optional<Cyclo>& value;
};
std::int64_t scan_cells(const FieldDesc& fd, const Integrand& f, const Formula* domain,
                        const std::vector<VarDecl>& vars, const Assignment& base, const IntegrationOptions& opts,
                        const std::function<void(const CellVisit&)>& fn);

/// Value of an integrand at a point.
Cyclo eval_integrand(const FieldDesc& fd, const SearchBox& box, const Integrand& f, const Assignment& x,
                     std::int64_t twist = 1);

} // namespace wb
