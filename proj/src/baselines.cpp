#include <splace/errors.hpp>
#include <splace/metrics.hpp>
#include <splace/placement.hpp>
#include <splace/rng.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace splace {

namespace {

void require_budget(const CandidatePool& pool, std::size_t m, const char* who) {
	if (m < pool.dim() || m > pool.size())
		throw InvalidInputError(std::string(who) + ": sensor count must satisfy n <= M <= N");
}

// Worst-out frame-potential elimination. Removing row r from the live set S
// lowers FP(S) by 2 * sum_{j in S} (phi_r^T phi_j)^2 - |phi_r|^4, so the row
// with the largest such drop is removed first.
class FrameEliminator {
public:
	explicit FrameEliminator(const CandidatePool& pool)
		: n_(pool.size()), squared_gram_(n_ * n_), row_sums_(n_, 0.0), alive_(n_, true), remaining_(n_) {
		for (std::size_t i = 0; i < n_; ++i) {
			for (std::size_t j = i; j < n_; ++j) {
				const double g = dot(pool.row(i), pool.row(j));
				squared_gram_[i * n_ + j] = g * g;
				squared_gram_[j * n_ + i] = g * g;
			}
		}
		for (std::size_t i = 0; i < n_; ++i)
			for (std::size_t j = 0; j < n_; ++j)
				row_sums_[i] += squared_gram_[i * n_ + j];
	}

	std::size_t remaining() const noexcept { return remaining_; }
	bool alive(std::size_t i) const noexcept { return alive_[i]; }

	std::size_t worst() const noexcept {
		std::size_t best = n_;
		double best_drop = -1.0;
		for (std::size_t i = 0; i < n_; ++i) {
			if (!alive_[i])
				continue;
			const double drop = 2.0 * row_sums_[i] - squared_gram_[i * n_ + i];
			if (drop > best_drop) {
				best_drop = drop;
				best = i;
			}
		}
		return best;
	}

	void remove(std::size_t r) noexcept {
		alive_[r] = false;
		--remaining_;
		for (std::size_t j = 0; j < n_; ++j)
			if (alive_[j])
				row_sums_[j] -= squared_gram_[j * n_ + r];
	}

	std::vector<std::size_t> survivors() const {
		std::vector<std::size_t> out;
		out.reserve(remaining_);
		for (std::size_t i = 0; i < n_; ++i)
			if (alive_[i])
				out.push_back(i);
		return out;
	}

private:
	std::size_t n_;
	std::vector<double> squared_gram_;
	std::vector<double> row_sums_;
	std::vector<bool> alive_;
	std::size_t remaining_;
};

} // namespace

std::vector<std::size_t> framesense_elimination(const CandidatePool& pool, std::size_t keep) {
	if (keep == 0 || keep > pool.size())
		throw InvalidInputError("framesense_elimination: keep must lie in [1, N]");
	FrameEliminator elim(pool);
	std::vector<std::size_t> order;
	order.reserve(pool.size() - keep);
	while (elim.remaining() > keep) {
		const std::size_t r = elim.worst();
		elim.remove(r);
		order.push_back(r);
	}
	return order;
}

PlacementResult run_framesense(const CandidatePool& pool, std::size_t m) {
	require_budget(pool, m, "run_framesense");
	const auto start = std::chrono::steady_clock::now();
	FrameEliminator elim(pool);
	while (elim.remaining() > m)
		elim.remove(elim.worst());

	PlacementResult result;
	result.algorithm = Algorithm::framesense;
	result.selected = elim.survivors();
	result.lambda_trace.push_back(linalg::sym_eigenvalues(gram_of_rows(pool.matrix(), result.selected)).back());
	result.satisfied = true;
	result.step_seconds.push_back(
		std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
	return result;
}

PlacementResult run_framesense_threshold(const CandidatePool& pool, const StoppingRule& rule) {
	if (rule.kind == StoppingRule::Kind::fixed_count) {
		rule.validate(pool);
		return run_framesense(pool, rule.count());
	}
	rule.validate(pool);

	FrameEliminator elim(pool);
	Matrix dual = gram(pool.matrix());
	PlacementResult result;
	result.algorithm = Algorithm::framesense;

	auto values = linalg::sym_eigenvalues(dual);
	if (!rule.threshold_met(values)) {
		result.selected = elim.survivors();
		result.lambda_trace.push_back(values.back());
		result.satisfied = false;
		return result;
	}
	double lambda_min = values.back();
	while (elim.remaining() > pool.dim()) {
		const std::size_t r = elim.worst();
		Matrix tentative = dual;
		add_outer(tentative, pool.row(r), -1.0);
		const auto tentative_values = linalg::sym_eigenvalues(tentative);
		if (!rule.threshold_met(tentative_values))
			break;
		elim.remove(r);
		dual = std::move(tentative);
		lambda_min = tentative_values.back();
	}
	result.selected = elim.survivors();
	result.lambda_trace.push_back(lambda_min);
	result.satisfied = true;
	return result;
}

PlacementResult run_random(const CandidatePool& pool, std::size_t m, std::uint64_t seed) {
	require_budget(pool, m, "run_random");
	rng::Xoshiro256 gen(seed);
	std::vector<std::size_t> perm(pool.size());
	std::iota(perm.begin(), perm.end(), std::size_t{0});
	for (std::size_t i = 0; i < m; ++i) {
		const std::size_t j = i + static_cast<std::size_t>(gen.below(perm.size() - i));
		std::swap(perm[i], perm[j]);
	}
	PlacementResult result;
	result.algorithm = Algorithm::random;
	result.selected.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(m));
	result.lambda_trace.push_back(linalg::sym_eigenvalues(gram_of_rows(pool.matrix(), result.selected)).back());
	result.satisfied = true;
	return result;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) noexcept {
	if (k > n)
		return 0;
	k = std::min(k, n - k);
	// C(n, i + 1) = C(n, i) * (n - i) / (i + 1); cancelling the gcd first keeps
	// every intermediate exact.
	std::uint64_t acc = 1;
	for (std::uint64_t i = 0; i < k; ++i) {
		const std::uint64_t g = std::gcd(acc, i + 1);
		const std::uint64_t factor = (n - i) / ((i + 1) / g);
		if (__builtin_mul_overflow(acc / g, factor, &acc))
			return std::numeric_limits<std::uint64_t>::max();
	}
	return acc;
}

PlacementResult exhaustive_oracle(const CandidatePool& pool, std::size_t m, OracleObjective objective,
                                  std::uint64_t cap) {
	require_budget(pool, m, "exhaustive_oracle");
	const std::uint64_t count = binomial(pool.size(), m);
	if (count > cap)
		throw InvalidInputError("exhaustive_oracle: C(N, M) = " + std::to_string(count) +
		                        " subsets exceeds the enumeration cap of " + std::to_string(cap));

	const std::size_t big_n = pool.size();
	std::vector<std::size_t> combo(m);
	std::iota(combo.begin(), combo.end(), std::size_t{0});

	std::vector<std::size_t> best_combo;
	double best_value = 0.0;
	double best_lambda = 0.0;
	for (;;) {
		const auto values = linalg::sym_eigenvalues(gram_of_rows(pool.matrix(), combo));
		const double value = objective == OracleObjective::max_lambda_min
		                         ? values.back()
		                         : metrics::mse_index_from_eigenvalues(values);
		const bool better = best_combo.empty() ||
		                    (objective == OracleObjective::max_lambda_min ? value > best_value : value < best_value);
		if (better) {
			best_combo = combo;
			best_value = value;
			best_lambda = values.back();
		}

		// Next combination in lexicographic order.
		std::size_t pos = m;
		while (pos > 0 && combo[pos - 1] == big_n - m + pos - 1)
			--pos;
		if (pos == 0)
			break;
		++combo[pos - 1];
		for (std::size_t j = pos; j < m; ++j)
			combo[j] = combo[j - 1] + 1;
	}

	PlacementResult result;
	result.algorithm = Algorithm::oracle;
	result.selected = std::move(best_combo);
	result.lambda_trace.push_back(best_lambda);
	result.satisfied = true;
	return result;
}

} // namespace splace
