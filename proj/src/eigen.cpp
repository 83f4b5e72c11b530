#include <splace/errors.hpp>
#include <splace/linalg.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace splace::linalg {

namespace {

Matrix symmetrized_copy(const Matrix& a) {
	if (!a.is_square())
		throw InvalidInputError("sym_eigendecompose: matrix is not square");
	if (!a.all_finite())
		throw InvalidInputError("sym_eigendecompose: non-finite entry");
	const double scale = std::max(1.0, a.max_abs());
	if (asymmetry(a) > 1e-10 * scale)
		throw InvalidInputError("sym_eigendecompose: matrix is not symmetric");

	Matrix s = a;
	const std::size_t n = a.rows();
	for (std::size_t i = 0; i < n; ++i)
		for (std::size_t j = i + 1; j < n; ++j) {
			const double m = 0.5 * (a(i, j) + a(j, i));
			s(i, j) = m;
			s(j, i) = m;
		}
	return s;
}

double off_diagonal_norm(const Matrix& a) noexcept {
	double sum = 0.0;
	const std::size_t n = a.rows();
	for (std::size_t i = 0; i < n; ++i)
		for (std::size_t j = i + 1; j < n; ++j)
			sum += a(i, j) * a(i, j);
	return std::sqrt(2.0 * sum);
}

// Cyclic-by-row Jacobi sweeps until off(A) <= tol * ||A||_F. `a` ends up
// (numerically) diagonal; rotations are accumulated into `v` when given.
void jacobi_diagonalize(Matrix& a, Matrix* v) {
	const std::size_t n = a.rows();
	const double threshold = kJacobiRelTolerance * a.frobenius_norm();

	for (std::size_t sweep = 0; sweep <= kJacobiMaxSweeps; ++sweep) {
		if (off_diagonal_norm(a) <= threshold)
			return;
		if (sweep == kJacobiMaxSweeps)
			break;

		for (std::size_t p = 0; p + 1 < n; ++p) {
			for (std::size_t q = p + 1; q < n; ++q) {
				const double apq = a(p, q);
				if (apq == 0.0)
					continue;

				const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
				double t;
				if (std::abs(theta) > 1e150)
					t = 0.5 / theta;
				else
					t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
				const double c = 1.0 / std::sqrt(t * t + 1.0);
				const double s = t * c;

				a(p, p) -= t * apq;
				a(q, q) += t * apq;
				a(p, q) = 0.0;
				a(q, p) = 0.0;
				for (std::size_t r = 0; r < n; ++r) {
					if (r == p || r == q)
						continue;
					const double arp = a(r, p);
					const double arq = a(r, q);
					const double new_rp = c * arp - s * arq;
					const double new_rq = s * arp + c * arq;
					a(r, p) = new_rp;
					a(p, r) = new_rp;
					a(r, q) = new_rq;
					a(q, r) = new_rq;
				}
				if (v != nullptr) {
					for (std::size_t r = 0; r < n; ++r) {
						const double vrp = (*v)(r, p);
						const double vrq = (*v)(r, q);
						(*v)(r, p) = c * vrp - s * vrq;
						(*v)(r, q) = s * vrp + c * vrq;
					}
				}
			}
		}
	}
	throw NumericFailureError("Jacobi eigensolver did not converge within the sweep cap");
}

std::vector<std::size_t> descending_order(const std::vector<double>& values) {
	std::vector<std::size_t> order(values.size());
	std::iota(order.begin(), order.end(), std::size_t{0});
	std::stable_sort(order.begin(), order.end(),
	                 [&](std::size_t x, std::size_t y) { return values[x] > values[y]; });
	return order;
}

} // namespace

std::vector<double> SymmetricEigenSystem::vector(std::size_t i) const {
	std::vector<double> u(vectors.rows());
	for (std::size_t r = 0; r < u.size(); ++r)
		u[r] = vectors(r, i);
	return u;
}

SymmetricEigenSystem sym_eigendecompose(const Matrix& input) {
	Matrix a = symmetrized_copy(input);
	const std::size_t n = a.rows();
	Matrix v = Matrix::identity(n);
	jacobi_diagonalize(a, &v);

	std::vector<double> diag(n);
	for (std::size_t i = 0; i < n; ++i)
		diag[i] = a(i, i);
	const auto order = descending_order(diag);

	SymmetricEigenSystem out;
	out.values.resize(n);
	out.vectors = Matrix(n, n);
	for (std::size_t col = 0; col < n; ++col) {
		const std::size_t src = order[col];
		out.values[col] = diag[src];

		std::size_t pivot = 0;
		double pivot_mag = -1.0;
		for (std::size_t r = 0; r < n; ++r) {
			const double mag = std::abs(v(r, src));
			if (mag > pivot_mag) {
				pivot_mag = mag;
				pivot = r;
			}
		}
		const double sign = v(pivot, src) < 0.0 ? -1.0 : 1.0;
		for (std::size_t r = 0; r < n; ++r)
			out.vectors(r, col) = sign * v(r, src);
	}
	return out;
}

std::vector<double> sym_eigenvalues(const Matrix& input) {
	Matrix a = symmetrized_copy(input);
	jacobi_diagonalize(a, nullptr);
	std::vector<double> values(a.rows());
	for (std::size_t i = 0; i < values.size(); ++i)
		values[i] = a(i, i);
	std::sort(values.begin(), values.end(), std::greater<>());
	return values;
}

std::vector<double> singular_values(const Matrix& input) {
	if (!input.all_finite())
		throw InvalidInputError("singular_values: non-finite entry");
	// Orthogonalize the columns of a tall matrix; rows are contiguous, so work on
	// the transpose and rotate its rows.
	Matrix w = input.rows() >= input.cols() ? input.transpose() : input;
	const std::size_t k = w.rows();
	const std::size_t len = w.cols();

	bool converged = false;
	for (std::size_t sweep = 0; sweep < kJacobiMaxSweeps && !converged; ++sweep) {
		converged = true;
		for (std::size_t p = 0; p + 1 < k; ++p) {
			for (std::size_t q = p + 1; q < k; ++q) {
				auto wp = w.row(p);
				auto wq = w.row(q);
				const double alpha = squared_norm(wp);
				const double beta = squared_norm(wq);
				const double gamma = dot(wp, wq);
				if (gamma == 0.0 || std::abs(gamma) <= 1e-15 * std::sqrt(alpha * beta))
					continue;
				converged = false;
				const double zeta = (beta - alpha) / (2.0 * gamma);
				const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
				const double c = 1.0 / std::sqrt(1.0 + t * t);
				const double s = c * t;
				for (std::size_t i = 0; i < len; ++i) {
					const double x = wp[i];
					const double y = wq[i];
					wp[i] = c * x - s * y;
					wq[i] = s * x + c * y;
				}
			}
		}
	}
	if (!converged)
		throw NumericFailureError("one-sided Jacobi SVD did not converge within the sweep cap");

	std::vector<double> sv(k);
	for (std::size_t i = 0; i < k; ++i)
		sv[i] = std::sqrt(squared_norm(w.row(i)));
	std::sort(sv.begin(), sv.end(), std::greater<>());
	return sv;
}

} // namespace splace::linalg
