#include <splace/errors.hpp>
#include <splace/placement.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace splace {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Indices of the m largest entries, ties to the lowest index, returned ascending.
std::vector<std::size_t> top_indices(std::span<const double> v, std::size_t m) {
	std::vector<std::size_t> idx(v.size());
	std::iota(idx.begin(), idx.end(), std::size_t{0});
	auto before = [&](std::size_t a, std::size_t b) { return v[a] > v[b] || (v[a] == v[b] && a < b); };
	std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(m), idx.end(), before);
	idx.resize(m);
	std::sort(idx.begin(), idx.end());
	return idx;
}

// Weighted dual sum w_i phi_i phi_i^T + ridge I.
Matrix weighted_dual(const CandidatePool& pool, std::span<const double> w, double ridge) {
	const std::size_t n = pool.dim();
	Matrix a(n, n);
	for (std::size_t i = 0; i < pool.size(); ++i)
		if (w[i] != 0.0)
			add_outer(a, pool.row(i), w[i]);
	for (std::size_t d = 0; d < n; ++d)
		a(d, d) += ridge;
	return a;
}

// Householder reduction of a symmetric matrix to tridiagonal form, keeping
// only the diagonal and the subdiagonal.
void tridiagonalize(Matrix& c, std::vector<double>& diag, std::vector<double>& sub) {
	const std::size_t n = c.rows();
	diag.assign(n, 0.0);
	sub.assign(n > 0 ? n - 1 : 0, 0.0);
	std::vector<double> v(n);
	std::vector<double> w(n);
	for (std::size_t k = 0; k + 2 < n; ++k) {
		double norm2 = 0.0;
		for (std::size_t i = k + 1; i < n; ++i)
			norm2 += c(i, k) * c(i, k);
		const double norm = std::sqrt(norm2);
		if (norm == 0.0) {
			sub[k] = 0.0;
			continue;
		}
		const double x0 = c(k + 1, k);
		const double alpha = x0 > 0.0 ? -norm : norm;
		for (std::size_t i = k + 1; i < n; ++i)
			v[i] = c(i, k);
		v[k + 1] -= alpha;
		double vnorm2 = 0.0;
		for (std::size_t i = k + 1; i < n; ++i)
			vnorm2 += v[i] * v[i];
		const double vscale = 1.0 / std::sqrt(vnorm2);
		for (std::size_t i = k + 1; i < n; ++i)
			v[i] *= vscale;

		// Trailing block S <- H S H with H = I - 2 v v^T.
		double kappa = 0.0;
		for (std::size_t i = k + 1; i < n; ++i) {
			double p = 0.0;
			for (std::size_t j = k + 1; j < n; ++j)
				p += c(i, j) * v[j];
			w[i] = p;
			kappa += v[i] * p;
		}
		for (std::size_t i = k + 1; i < n; ++i)
			w[i] -= kappa * v[i];
		for (std::size_t i = k + 1; i < n; ++i)
			for (std::size_t j = k + 1; j < n; ++j)
				c(i, j) -= 2.0 * (v[i] * w[j] + w[i] * v[j]);
		sub[k] = alpha;
	}
	for (std::size_t i = 0; i < n; ++i)
		diag[i] = c(i, i);
	if (n >= 2)
		sub[n - 2] = c(n - 1, n - 2);
}

// log det(I + t T) for the tridiagonal T, from the pivots of its LDL^T
// factorization; -inf when not positive definite.
double tridiagonal_log_det(const std::vector<double>& diag, const std::vector<double>& sub, double t) {
	// Pivots are multiplied in blocks and logged once per block; the product of
	// a few pivots cannot leave the normal range.
	constexpr std::size_t kBlock = 8;
	double sum = 0.0;
	double product = 1.0;
	double prev = 1.0;
	for (std::size_t i = 0; i < diag.size(); ++i) {
		double pivot = 1.0 + t * diag[i];
		if (i > 0) {
			const double off = t * sub[i - 1];
			pivot -= off * off / prev;
		}
		if (!(pivot > 0.0))
			return kNegInf;
		product *= pivot;
		prev = pivot;
		if ((i + 1) % kBlock == 0) {
			sum += std::log(product);
			product = 1.0;
		}
	}
	return sum + std::log(product);
}

// With A = L L^T, returns L^{-1} (S - A) L^{-T}, so that
// log det((1 - t) A + t S) = log det A + log det(I + t C).
Matrix whitened_direction(const Matrix& factor, const Matrix& a, const Matrix& s) {
	const std::size_t n = a.rows();
	Matrix y(n, n);
	for (std::size_t j = 0; j < n; ++j) {
		auto col = y.row(j);
		for (std::size_t i = 0; i < n; ++i)
			col[i] = s(i, j) - a(i, j);
		linalg::forward_substitute(factor, col);
	}
	// Row j of y holds column j of L^{-1} D, so row j of its transpose is row j
	// of L^{-1} D; solving against it gives column j of C.
	Matrix c = y.transpose();
	Matrix out(n, n);
	for (std::size_t j = 0; j < n; ++j) {
		auto row = c.row(j);
		linalg::forward_substitute(factor, row);
	}
	for (std::size_t i = 0; i < n; ++i)
		for (std::size_t j = 0; j < n; ++j)
			out(i, j) = 0.5 * (c(i, j) + c(j, i));
	return out;
}

void require_budget(const CandidatePool& pool, std::size_t m) {
	if (m < pool.dim() || m > pool.size())
		throw InvalidInputError("run_convex_relaxation: sensor count must satisfy n <= M <= N");
}

} // namespace

RelaxationOutcome run_convex_relaxation(const CandidatePool& pool, std::size_t m, const RelaxationConfig& config) {
	require_budget(pool, m);
	const auto start = std::chrono::steady_clock::now();
	const std::size_t n = pool.dim();
	const std::size_t big_n = pool.size();

	double ridge = 0.0;
	if (config.ridge) {
		ridge = *config.ridge;
		if (!(ridge >= 0.0) || !std::isfinite(ridge))
			throw InvalidInputError("run_convex_relaxation: ridge must be finite and nonnegative");
	} else {
		double trace = 0.0;
		for (std::size_t i = 0; i < big_n; ++i)
			trace += pool.row_squared_norm(i);
		ridge = 1e-8 * trace / static_cast<double>(n);
	}

	RelaxationWeights weights;
	weights.budget = m;
	weights.w.assign(big_n, static_cast<double>(m) / static_cast<double>(big_n));

	Matrix a = weighted_dual(pool, weights.w, ridge);
	Matrix factor = a;
	if (!linalg::cholesky_in_place(factor))
		throw NumericFailureError("run_convex_relaxation: weighted dual matrix is not positive definite");
	double objective = linalg::cholesky_log_det(factor);
	weights.objective_trace.push_back(objective);

	std::vector<double> grad(big_n);
	const Matrix pool_t = pool.matrix().transpose();
	Matrix solved(n, big_n);
	std::vector<double> vertex(big_n);
	std::vector<double> diag;
	std::vector<double> sub;
	constexpr double kGolden = 0.6180339887498949;

	for (std::size_t iter = 0; iter < config.max_iterations; ++iter) {
		// Column i of `solved` becomes L^{-1} phi_i; all candidates at once.
		solved = pool_t;
		for (std::size_t r = 0; r < n; ++r) {
			auto dst = solved.row(r);
			for (std::size_t k = 0; k < r; ++k) {
				const double l = factor(r, k);
				const auto src = solved.row(k);
				for (std::size_t i = 0; i < big_n; ++i)
					dst[i] -= l * src[i];
			}
			const double inv = 1.0 / factor(r, r);
			for (double& x : dst)
				x *= inv;
		}
		std::fill(grad.begin(), grad.end(), 0.0);
		for (std::size_t r = 0; r < n; ++r) {
			const auto src = solved.row(r);
			for (std::size_t i = 0; i < big_n; ++i)
				grad[i] += src[i] * src[i];
		}
		const auto top = top_indices(grad, m);
		std::fill(vertex.begin(), vertex.end(), 0.0);
		for (std::size_t i : top)
			vertex[i] = 1.0;

		double gap = 0.0;
		for (std::size_t i = 0; i < big_n; ++i)
			gap += grad[i] * (vertex[i] - weights.w[i]);
		weights.final_gap = gap;
		if (gap <= config.gap_tolerance * std::abs(objective)) {
			weights.converged = true;
			break;
		}

		const Matrix s = weighted_dual(pool, vertex, ridge);
		Matrix direction = whitened_direction(factor, a, s);
		tridiagonalize(direction, diag, sub);
		auto gain = [&](double t) { return tridiagonal_log_det(diag, sub, t); };

		double lo = 0.0;
		double hi = 1.0;
		double x1 = hi - kGolden * (hi - lo);
		double x2 = lo + kGolden * (hi - lo);
		double f1 = gain(x1);
		double f2 = gain(x2);
		for (std::size_t step = 0; step < config.line_search_steps; ++step) {
			if (f1 < f2) {
				lo = x1;
				x1 = x2;
				f1 = f2;
				x2 = lo + kGolden * (hi - lo);
				f2 = gain(x2);
			} else {
				hi = x2;
				x2 = x1;
				f2 = f1;
				x1 = hi - kGolden * (hi - lo);
				f1 = gain(x1);
			}
		}
		double t = f1 >= f2 ? x1 : x2;
		double best = std::max(f1, f2);
		if (gain(1.0) > best) {
			best = gain(1.0);
			t = 1.0;
		}
		if (!(best > 0.0))
			break;

		Matrix next = a;
		auto pn = next.data();
		auto ps = s.data();
		for (std::size_t i = 0; i < pn.size(); ++i)
			pn[i] = (1.0 - t) * pn[i] + t * ps[i];
		Matrix next_factor = next;
		if (!linalg::cholesky_in_place(next_factor))
			break;
		const double next_objective = linalg::cholesky_log_det(next_factor);
		// A gain at rounding level can vanish once the matrix is refactored.
		if (!(next_objective > objective))
			break;

		for (std::size_t i = 0; i < big_n; ++i)
			weights.w[i] = (1.0 - t) * weights.w[i] + t * vertex[i];
		a = std::move(next);
		factor = std::move(next_factor);
		objective = next_objective;
		weights.objective_trace.push_back(objective);
		weights.iterations = iter + 1;
	}

	RelaxationOutcome out;
	out.placement.algorithm = Algorithm::convex;
	out.placement.selected = top_indices(weights.w, m);
	out.placement.lambda_trace.push_back(
		linalg::sym_eigenvalues(gram_of_rows(pool.matrix(), out.placement.selected)).back());
	out.placement.satisfied = true;
	out.placement.step_seconds.push_back(
		std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
	out.weights = std::move(weights);
	return out;
}

PlacementResult run_convex_threshold(const CandidatePool& pool, const StoppingRule& rule,
                                     const RelaxationConfig& config) {
	rule.validate(pool);
	if (rule.kind == StoppingRule::Kind::fixed_count)
		return run_convex_relaxation(pool, rule.count(), config).placement;

	for (std::size_t m = pool.dim(); m <= pool.size(); ++m) {
		auto outcome = run_convex_relaxation(pool, m, config);
		const auto values = linalg::sym_eigenvalues(gram_of_rows(pool.matrix(), outcome.placement.selected));
		if (rule.threshold_met(values)) {
			outcome.placement.satisfied = true;
			return std::move(outcome.placement);
		}
	}
	PlacementResult all;
	all.algorithm = Algorithm::convex;
	all.selected.resize(pool.size());
	std::iota(all.selected.begin(), all.selected.end(), std::size_t{0});
	all.lambda_trace.push_back(linalg::sym_eigenvalues(gram(pool.matrix())).back());
	all.satisfied = false;
	return all;
}

} // namespace splace
