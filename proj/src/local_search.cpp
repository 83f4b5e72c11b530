#include <splace/errors.hpp>
#include <splace/metrics.hpp>
#include <splace/placement.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace splace {

namespace {

// Slack applied to the screening bounds so that only swaps that provably
// cannot win are skipped; survivors are always evaluated exactly.
constexpr double kScreenSlack = 1e-6;

// Candidate for the best swap in one pass.
struct Swap {
	std::size_t position = 0;
	std::size_t incoming = 0;
	double value = 0.0;
	bool found = false;
};

double exact_value(const CandidatePool& pool, std::vector<std::size_t>& trial, std::size_t pos,
                   std::size_t incoming, Criterion criterion) {
	const std::size_t outgoing = trial[pos];
	trial[pos] = incoming;
	const double v = criterion_value(pool, trial, criterion);
	trial[pos] = outgoing;
	return v;
}

// Smallest eigenvalue of a 3x3 symmetric matrix (or smaller leading block).
double small_min_eigenvalue(const Matrix& m) { return linalg::sym_eigenvalues(m).back(); }

// Best single swap for WCEV. The smallest Ritz value of Psi' on the span of
// the three lowest eigenvectors of Psi bounds lambda_min(Psi') from above;
// a Cholesky test of Psi' - t I then decides lambda_min(Psi') >= t.
Swap best_wcev_swap(const CandidatePool& pool, std::vector<std::size_t>& current, const std::vector<bool>& taken,
                    double incumbent, double relative_margin) {
	const std::size_t n = pool.dim();
	const std::size_t big_n = pool.size();
	const Matrix dual = gram_of_rows(pool.matrix(), current);
	const auto eig = linalg::sym_eigendecompose(dual);
	const std::size_t r = std::min<std::size_t>(3, n);

	std::vector<std::array<double, 3>> coords(big_n);
	for (std::size_t i = 0; i < big_n; ++i) {
		const auto row = pool.row(i);
		for (std::size_t c = 0; c < r; ++c) {
			double s = 0.0;
			for (std::size_t d = 0; d < n; ++d)
				s += eig.vectors(d, n - 1 - c) * row[d];
			coords[i][c] = s;
		}
	}

	// lambda_min must exceed this for a strict improvement of 1/lambda_min.
	const double lambda_now = incumbent == metrics::kInfinity ? 0.0 : 1.0 / incumbent;
	Swap best;
	Matrix ritz(r, r);
	Matrix shifted(n, n);
	std::vector<std::size_t> order(current.size());
	for (std::size_t p = 0; p < order.size(); ++p)
		order[p] = p;
	std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return current[a] < current[b]; });

	for (std::size_t pos : order) {
		const std::size_t out = current[pos];
		for (std::size_t in = 0; in < big_n; ++in) {
			if (taken[in])
				continue;
			double needed = lambda_now * (1.0 + relative_margin);
			if (best.found)
				needed = std::max(needed, 1.0 / best.value);

			for (std::size_t a = 0; a < r; ++a) {
				for (std::size_t b = 0; b < r; ++b) {
					double v = coords[in][a] * coords[in][b] - coords[out][a] * coords[out][b];
					if (a == b)
						v += eig.values[n - 1 - a];
					ritz(a, b) = v;
				}
			}
			const double target = needed * (1.0 - kScreenSlack);
			if (small_min_eigenvalue(ritz) < target)
				continue;
			if (target > 0.0) {
				shifted = dual;
				add_outer(shifted, pool.row(in));
				add_outer(shifted, pool.row(out), -1.0);
				for (std::size_t d = 0; d < n; ++d)
					shifted(d, d) -= target;
				if (!linalg::cholesky_in_place(shifted))
					continue;
			}

			const double v = exact_value(pool, current, pos, in, Criterion::wcev);
			if (!strictly_improves(v, incumbent, relative_margin))
				continue;
			if (!best.found || v < best.value) {
				best = {pos, in, v, true};
			}
		}
	}
	return best;
}

// Best single swap for MSE. With B = Psi^{-1}, Woodbury on the rank-two
// change gives tr(Psi'^{-1}) from a 2x2 system per swap.
Swap best_mse_swap(const CandidatePool& pool, std::vector<std::size_t>& current, const std::vector<bool>& taken,
                   double incumbent, double relative_margin) {
	const std::size_t n = pool.dim();
	const std::size_t big_n = pool.size();
	std::vector<std::size_t> order(current.size());
	for (std::size_t p = 0; p < order.size(); ++p)
		order[p] = p;
	std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return current[a] < current[b]; });

	Swap best;
	if (incumbent == metrics::kInfinity) {
		// Singular start: no inverse to screen with, so evaluate everything.
		for (std::size_t pos : order) {
			for (std::size_t in = 0; in < big_n; ++in) {
				if (taken[in])
					continue;
				const double v = exact_value(pool, current, pos, in, Criterion::mse);
				if (strictly_improves(v, incumbent, relative_margin) && (!best.found || v < best.value))
					best = {pos, in, v, true};
			}
		}
		return best;
	}

	const auto eig = linalg::sym_eigendecompose(gram_of_rows(pool.matrix(), current));
	Matrix inverse(n, n);
	for (std::size_t c = 0; c < n; ++c) {
		const double inv = 1.0 / eig.values[c];
		for (std::size_t i = 0; i < n; ++i) {
			const double uic = eig.vectors(i, c) * inv;
			for (std::size_t j = 0; j < n; ++j)
				inverse(i, j) += uic * eig.vectors(j, c);
		}
	}
	const double base_trace = incumbent;

	// h_i = B phi_i, with the quadratic forms phi_i^T B phi_i and |B phi_i|^2.
	Matrix h(big_n, n);
	std::vector<double> quad(big_n);
	std::vector<double> quad2(big_n);
	for (std::size_t i = 0; i < big_n; ++i) {
		const auto row = pool.row(i);
		auto hi = h.row(i);
		for (std::size_t a = 0; a < n; ++a)
			hi[a] = dot(inverse.row(a), row);
		quad[i] = dot(row, hi);
		quad2[i] = squared_norm(hi);
	}

	for (std::size_t pos : order) {
		const std::size_t out = current[pos];
		for (std::size_t in = 0; in < big_n; ++in) {
			if (taken[in])
				continue;
			double needed = base_trace * (1.0 - relative_margin);
			if (best.found)
				needed = std::min(needed, best.value);

			// Psi' = Psi + U C U^T with U = [phi_in, phi_out], C = diag(1, -1).
			const double cross = dot(pool.row(in), h.row(out));
			const double cross2 = dot(h.row(in), h.row(out));
			const double k00 = 1.0 + quad[in];
			const double k11 = -1.0 + quad[out];
			const double det = k00 * k11 - cross * cross;
			// det(Psi') / det(Psi) = -det(K); near zero means Psi' is near singular.
			const double ratio = -det;
			if (ratio > 1e-8) {
				const double t00 = quad2[in];
				const double t11 = quad2[out];
				const double t01 = cross2;
				const double correction = (k11 * t00 - 2.0 * cross * t01 + k00 * t11) / det;
				const double estimate = base_trace - correction;
				if (estimate > needed * (1.0 + kScreenSlack))
					continue;
			}

			const double v = exact_value(pool, current, pos, in, Criterion::mse);
			if (!strictly_improves(v, incumbent, relative_margin))
				continue;
			if (!best.found || v < best.value)
				best = {pos, in, v, true};
		}
	}
	return best;
}

} // namespace

std::string_view to_string(Criterion c) noexcept {
	switch (c) {
	case Criterion::wcev: return "wcev";
	case Criterion::mse: return "mse";
	}
	return "unknown";
}

Criterion parse_criterion(std::string_view name) {
	if (name == "wcev")
		return Criterion::wcev;
	if (name == "mse")
		return Criterion::mse;
	throw InvalidInputError("unknown local optimization criterion '" + std::string(name) + "'");
}

double criterion_value(const CandidatePool& pool, std::span<const std::size_t> selected, Criterion criterion) {
	const auto values = linalg::sym_eigenvalues(gram_of_rows(pool.matrix(), selected));
	return criterion == Criterion::wcev ? metrics::wcev_index_from_eigenvalues(values)
	                                    : metrics::mse_index_from_eigenvalues(values);
}

bool strictly_improves(double candidate, double incumbent, double relative_margin) noexcept {
	if (!std::isfinite(candidate))
		return false;
	if (!std::isfinite(incumbent))
		return true;
	return candidate < incumbent - relative_margin * std::abs(incumbent);
}

PlacementResult local_optimize(const CandidatePool& pool, const PlacementResult& start, Criterion criterion,
                               const LocalSearchOptions& options) {
	const std::size_t big_n = pool.size();
	std::vector<bool> taken(big_n, false);
	for (std::size_t i : start.selected) {
		if (i >= big_n)
			throw InvalidInputError("local_optimize: index " + std::to_string(i) + " out of range");
		if (taken[i])
			throw InvalidInputError("local_optimize: duplicate index " + std::to_string(i));
		taken[i] = true;
	}
	if (start.selected.size() < pool.dim())
		throw InvalidInputError("local_optimize: selection must hold at least n sensors");

	PlacementResult result = start;
	result.score_trace.clear();
	result.local_passes = 0;
	result.local_pass_cap_hit = false;
	std::vector<std::size_t> current = start.selected;
	double value = criterion_value(pool, current, criterion);

	bool improved = true;
	while (improved) {
		if (result.local_passes == options.max_passes) {
			result.local_pass_cap_hit = true;
			break;
		}
		++result.local_passes;
		const Swap swap = criterion == Criterion::wcev
		                      ? best_wcev_swap(pool, current, taken, value, options.relative_improvement)
		                      : best_mse_swap(pool, current, taken, value, options.relative_improvement);
		improved = swap.found;
		if (improved) {
			taken[current[swap.position]] = false;
			taken[swap.incoming] = true;
			current[swap.position] = swap.incoming;
			value = swap.value;
		}
	}

	std::sort(current.begin(), current.end());
	result.selected = std::move(current);
	result.lambda_trace.assign(
		1, linalg::sym_eigenvalues(gram_of_rows(pool.matrix(), result.selected)).back());
	return result;
}

} // namespace splace
