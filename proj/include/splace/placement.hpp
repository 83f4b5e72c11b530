#pragma once

#include <splace/pool.hpp>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace splace {

enum class Algorithm { mpme, mnep, framesense, convex, random, oracle };

std::string_view to_string(Algorithm a) noexcept;
/// Throws InvalidInputError on unknown names.
Algorithm parse_algorithm(std::string_view name);

/// When a greedy run may stop.
///
/// fixed_count stops at exactly `count` sensors; the threshold kinds stop at
/// the first k >= n with lambda_n >= value (wcev) or tr(Psi^{-1}) <= value (mse).
struct StoppingRule {
	enum class Kind { fixed_count, wcev_threshold, mse_threshold };

	Kind kind = Kind::fixed_count;
	double value = 0.0;

	static StoppingRule fixed(std::size_t m) { return {Kind::fixed_count, static_cast<double>(m)}; }
	static StoppingRule wcev(double gamma) { return {Kind::wcev_threshold, gamma}; }
	static StoppingRule mse(double threshold) { return {Kind::mse_threshold, threshold}; }

	std::size_t count() const noexcept { return static_cast<std::size_t>(value); }
	/// Whether a dual matrix with these eigenvalues (nonincreasing) meets a threshold rule.
	bool threshold_met(std::span<const double> eigenvalues_desc) const;
	/// Checks value > 0, and n <= M <= N for fixed_count.
	void validate(const CandidatePool& pool) const;
};

struct PlacementResult {
	Algorithm algorithm = Algorithm::mpme;
	std::vector<std::size_t> selected;
	/// lambda_n(Psi_k) for every k >= n reached by the run.
	std::vector<double> lambda_trace;
	/// Winning score at every step (projection for MPME, eigenvalue for MNEP).
	std::vector<double> score_trace;
	/// Cumulative wall time after each selection step (greedy runs only).
	std::vector<double> step_seconds;
	bool satisfied = false;
	std::size_t local_passes = 0;
	bool local_pass_cap_hit = false;

	std::size_t M() const noexcept { return selected.size(); }
};

/// Maximal projection on the minimum eigenspace. Ties go to the lowest index.
/// Throws RankDeficiencyError if at some k <= n every remaining candidate has
/// zero projection.
PlacementResult run_mpme(const CandidatePool& pool, const StoppingRule& rule);

/// Minimum nonzero eigenvalue pursuit: each candidate scored by a full
/// eigendecomposition of Psi_{k-1} + phi phi^T.
PlacementResult run_mnep(const CandidatePool& pool, const StoppingRule& rule);

/// Order in which worst-out frame-potential elimination removes rows, stopping
/// once `keep` rows remain.
std::vector<std::size_t> framesense_elimination(const CandidatePool& pool, std::size_t keep);

/// Rows left after eliminating down to M, ascending.
PlacementResult run_framesense(const CandidatePool& pool, std::size_t m);

/// Elimination that stops before the first removal breaking the threshold rule.
/// If the full pool already fails, returns every row with satisfied = false.
PlacementResult run_framesense_threshold(const CandidatePool& pool, const StoppingRule& rule);

struct RelaxationConfig {
	std::size_t max_iterations = 500;
	std::size_t line_search_steps = 50;
	double gap_tolerance = 1e-6;
	/// Defaults to 1e-8 * trace(Phi^T Phi) / n.
	std::optional<double> ridge;
};

struct RelaxationWeights {
	std::vector<double> w;
	std::size_t budget = 0;
	std::size_t iterations = 0;
	std::vector<double> objective_trace;
	double final_gap = 0.0;
	bool converged = false;
};

struct RelaxationOutcome {
	RelaxationWeights weights;
	PlacementResult placement;
};

/// Frank-Wolfe on max log det(sum w_i phi_i phi_i^T + eps I) subject to
/// 0 <= w <= 1, sum w = M, then top-M rounding (ties to the lowest index).
RelaxationOutcome run_convex_relaxation(const CandidatePool& pool, std::size_t m,
                                        const RelaxationConfig& config = {});

/// Smallest M >= n whose rounded relaxation meets the threshold rule,
/// re-solving at each M. Returns all rows with satisfied = false if none does.
PlacementResult run_convex_threshold(const CandidatePool& pool, const StoppingRule& rule,
                                     const RelaxationConfig& config = {});

/// Uniform sample of M distinct indices, in draw order; deterministic per seed.
PlacementResult run_random(const CandidatePool& pool, std::size_t m, std::uint64_t seed);

enum class OracleObjective { max_lambda_min, min_mse };

inline constexpr std::uint64_t kDefaultOracleCap = 2'000'000;

/// Enumerates every size-M subset; ties go to the lexicographically smallest.
/// Throws InvalidInputError if C(N, M) exceeds `cap`.
PlacementResult exhaustive_oracle(const CandidatePool& pool, std::size_t m, OracleObjective objective,
                                  std::uint64_t cap = kDefaultOracleCap);

/// C(n, k), saturating at UINT64_MAX.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k) noexcept;

enum class Criterion { wcev, mse };

std::string_view to_string(Criterion c) noexcept;
Criterion parse_criterion(std::string_view name);

struct LocalSearchOptions {
	std::size_t max_passes = 100;
	double relative_improvement = 1e-12;
};

/// Criterion value of a selection, via the metrics module (+inf when singular).
double criterion_value(const CandidatePool& pool, std::span<const std::size_t> selected, Criterion criterion);

/// True when `candidate` beats `incumbent` by more than the relative margin.
bool strictly_improves(double candidate, double incumbent, double relative_margin) noexcept;

/// Best-improvement single-swap exchange until no swap between a selected and
/// an unselected candidate improves the criterion. Hitting the pass cap sets
/// local_pass_cap_hit instead of throwing.
PlacementResult local_optimize(const CandidatePool& pool, const PlacementResult& start, Criterion criterion,
                               const LocalSearchOptions& options = {});

} // namespace splace
