#include <splace/errors.hpp>
#include <splace/metrics.hpp>
#include <splace/placement.hpp>

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

namespace splace {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
	return std::chrono::duration<double>(Clock::now() - start).count();
}

// Shared bookkeeping after a greedy step. Returns true when the run should stop.
bool record_step(const SelectionState& state, const StoppingRule& rule, PlacementResult& result) {
	const std::size_t n = state.pool().dim();
	if (state.k() < n)
		return false;
	const auto& values = state.eigensystem().values;
	result.lambda_trace.push_back(values.back());
	if (rule.kind == StoppingRule::Kind::fixed_count) {
		if (state.k() == rule.count()) {
			result.satisfied = true;
			return true;
		}
		return false;
	}
	if (rule.threshold_met(values)) {
		result.satisfied = true;
		return true;
	}
	return false;
}

} // namespace

std::string_view to_string(Algorithm a) noexcept {
	switch (a) {
	case Algorithm::mpme: return "mpme";
	case Algorithm::mnep: return "mnep";
	case Algorithm::framesense: return "framesense";
	case Algorithm::convex: return "convex";
	case Algorithm::random: return "random";
	case Algorithm::oracle: return "oracle";
	}
	return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
	for (auto a : {Algorithm::mpme, Algorithm::mnep, Algorithm::framesense, Algorithm::convex, Algorithm::random,
	               Algorithm::oracle})
		if (to_string(a) == name)
			return a;
	throw InvalidInputError("unknown algorithm '" + std::string(name) + "'");
}

bool StoppingRule::threshold_met(std::span<const double> eigenvalues_desc) const {
	switch (kind) {
	case Kind::wcev_threshold: return !eigenvalues_desc.empty() && eigenvalues_desc.back() >= value;
	case Kind::mse_threshold: return metrics::mse_index_from_eigenvalues(eigenvalues_desc) <= value;
	case Kind::fixed_count: return false;
	}
	return false;
}

void StoppingRule::validate(const CandidatePool& pool) const {
	if (!(value > 0.0) || !std::isfinite(value))
		throw InvalidInputError("stopping rule value must be positive and finite");
	if (kind == Kind::fixed_count) {
		if (value != std::floor(value) || count() < pool.dim() || count() > pool.size())
			throw InvalidInputError("fixed sensor count must be an integer with n <= M <= N");
	}
}

PlacementResult run_mpme(const CandidatePool& pool, const StoppingRule& rule) {
	rule.validate(pool);
	const std::size_t n = pool.dim();
	const std::size_t big_n = pool.size();
	const auto start = Clock::now();

	PlacementResult result;
	result.algorithm = Algorithm::mpme;
	SelectionState state(pool);

	while (state.k() < big_n) {
		const bool building_rank = state.k() < n;
		const auto& projector = state.projector();
		std::size_t best = big_n;
		double best_score = -1.0;
		for (std::size_t i = 0; i < big_n; ++i) {
			if (state.is_selected(i))
				continue;
			const double zeta = projector.squared_projection(pool.row(i));
			if (building_rank && zeta <= 1e-12 * pool.row_squared_norm(i))
				continue;
			if (zeta > best_score) {
				best_score = zeta;
				best = i;
			}
		}
		if (best == big_n)
			throw RankDeficiencyError("run_mpme: no remaining candidate extends the rank at step " +
			                          std::to_string(state.k() + 1));

		state.extend(best);
		result.score_trace.push_back(best_score);
		result.step_seconds.push_back(seconds_since(start));
		if (record_step(state, rule, result))
			break;
	}
	result.selected.assign(state.selected().begin(), state.selected().end());
	return result;
}

PlacementResult run_mnep(const CandidatePool& pool, const StoppingRule& rule) {
	rule.validate(pool);
	const std::size_t n = pool.dim();
	const std::size_t big_n = pool.size();
	const auto start = Clock::now();

	PlacementResult result;
	result.algorithm = Algorithm::mnep;
	SelectionState state(pool);
	Matrix trial(n, n);

	while (state.k() < big_n) {
		const std::size_t k_next = state.k() + 1;
		const bool building_rank = k_next <= n;
		const std::size_t target = building_rank ? k_next - 1 : n - 1;

		std::size_t best = big_n;
		double best_score = -std::numeric_limits<double>::infinity();
		for (std::size_t i = 0; i < big_n; ++i) {
			if (state.is_selected(i))
				continue;
			trial = state.dual();
			add_outer(trial, pool.row(i));
			const auto values = linalg::sym_eigenvalues(trial);
			const double score = values[target];
			if (building_rank && score <= 1e-12 * values.front())
				continue;
			if (score > best_score) {
				best_score = score;
				best = i;
			}
		}
		if (best == big_n)
			throw RankDeficiencyError("run_mnep: no remaining candidate extends the rank at step " +
			                          std::to_string(k_next));

		state.extend(best);
		result.score_trace.push_back(best_score);
		result.step_seconds.push_back(seconds_since(start));
		if (record_step(state, rule, result))
			break;
	}
	result.selected.assign(state.selected().begin(), state.selected().end());
	return result;
}

} // namespace splace
