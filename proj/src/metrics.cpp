#include <splace/errors.hpp>
#include <splace/linalg.hpp>
#include <splace/metrics.hpp>

#include <algorithm>
#include <cmath>

namespace splace::metrics {

NoiseModel::NoiseModel(double sigma2) : variance(sigma2) {
	if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
		throw InvalidInputError("NoiseModel: variance must be positive and finite");
}

bool is_singular(std::span<const double> eig) noexcept {
	if (eig.empty())
		return true;
	return eig.back() <= kSingularityFloor * std::max(eig.front(), 1e-30);
}

double mse_index_from_eigenvalues(std::span<const double> eig) noexcept {
	if (is_singular(eig))
		return kInfinity;
	double s = 0.0;
	for (double v : eig)
		s += 1.0 / v;
	return s;
}

double wcev_index_from_eigenvalues(std::span<const double> eig) noexcept {
	if (is_singular(eig))
		return kInfinity;
	return 1.0 / eig.back();
}

double mse_index(const Matrix& dual) { return mse_index_from_eigenvalues(linalg::sym_eigenvalues(dual)); }

double wcev_index(const Matrix& dual) { return wcev_index_from_eigenvalues(linalg::sym_eigenvalues(dual)); }

double condition_number(const Matrix& dual) {
	const auto eig = linalg::sym_eigenvalues(dual);
	if (is_singular(eig))
		return kInfinity;
	return eig.front() / eig.back();
}

double frame_potential(const Matrix& rows) {
	double fp = 0.0;
	for (std::size_t i = 0; i < rows.rows(); ++i) {
		const double own = squared_norm(rows.row(i));
		fp += own * own;
		for (std::size_t j = i + 1; j < rows.rows(); ++j) {
			const double g = dot(rows.row(i), rows.row(j));
			fp += 2.0 * g * g;
		}
	}
	return fp;
}

double frame_potential(const Matrix& pool, std::span<const std::size_t> selected) {
	double fp = 0.0;
	for (std::size_t a = 0; a < selected.size(); ++a) {
		const double own = squared_norm(pool.row(selected[a]));
		fp += own * own;
		for (std::size_t b = a + 1; b < selected.size(); ++b) {
			const double g = dot(pool.row(selected[a]), pool.row(selected[b]));
			fp += 2.0 * g * g;
		}
	}
	return fp;
}

MetricReport evaluate(const Matrix& pool, std::span<const std::size_t> selected) {
	const Matrix dual = gram_of_rows(pool, selected);
	const auto eig = linalg::sym_eigenvalues(dual);
	MetricReport r;
	r.lambda_max = eig.front();
	r.lambda_min = eig.back();
	r.mse_index = mse_index_from_eigenvalues(eig);
	r.wcev_index = wcev_index_from_eigenvalues(eig);
	r.condition_number = is_singular(eig) ? kInfinity : eig.front() / eig.back();
	r.frame_potential = frame_potential(pool, selected);
	return r;
}

std::vector<double> mvue_estimate(const Matrix& phi, std::span<const double> y) {
	if (phi.rows() != y.size())
		throw InvalidInputError("mvue_estimate: measurement count differs from observation rows");
	if (!phi.all_finite() || !std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); }))
		throw InvalidInputError("mvue_estimate: non-finite input");

	const auto eig = linalg::sym_eigendecompose(gram(phi));
	if (is_singular(eig.values))
		throw RankDeficiencyError("mvue_estimate: observation matrix is not full column rank");

	// alpha = U diag(1/lambda) U^T (Phi^T y)
	const std::size_t n = phi.cols();
	std::vector<double> rhs(n, 0.0);
	for (std::size_t r = 0; r < phi.rows(); ++r) {
		auto row = phi.row(r);
		for (std::size_t j = 0; j < n; ++j)
			rhs[j] += row[j] * y[r];
	}
	std::vector<double> alpha(n, 0.0);
	for (std::size_t c = 0; c < n; ++c) {
		double coef = 0.0;
		for (std::size_t j = 0; j < n; ++j)
			coef += eig.vectors(j, c) * rhs[j];
		coef /= eig.values[c];
		for (std::size_t j = 0; j < n; ++j)
			alpha[j] += coef * eig.vectors(j, c);
	}
	return alpha;
}

std::vector<double> reconstruct_field(const Matrix& pool, std::span<const double> alpha) {
	if (pool.cols() != alpha.size())
		throw InvalidInputError("reconstruct_field: coefficient length differs from pool columns");
	return multiply(pool, alpha);
}

} // namespace splace::metrics
