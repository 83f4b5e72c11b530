#include <splace/errors.hpp>
#include <splace/linalg.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace splace::linalg {

double Projector::squared_projection(std::span<const double> v) const {
	const std::size_t n = matrix.rows();
	double s = 0.0;
	for (std::size_t i = 0; i < n; ++i) {
		const double pi = dot(matrix.row(i), v);
		s += pi * pi;
	}
	return s;
}

bool append_orthonormal(OrthonormalBasis& basis, std::span<const double> input) {
	const std::size_t dim = basis.dim;
	if (input.size() != dim)
		throw InvalidInputError("orthonormalize: vector length differs from the ambient dimension");
	if (!std::all_of(input.begin(), input.end(), [](double x) { return std::isfinite(x); }))
		throw InvalidInputError("orthonormalize: non-finite entry");

	const double original = std::sqrt(squared_norm(input));
	if (original == 0.0)
		return false;

	std::vector<double> r(input.begin(), input.end());
	for (int pass = 0; pass < 2; ++pass) {
		for (const auto& q : basis.vectors) {
			const double c = dot(q, r);
			for (std::size_t i = 0; i < dim; ++i)
				r[i] -= c * q[i];
		}
	}
	const double residual = std::sqrt(squared_norm(r));
	if (residual <= kGramSchmidtDropTolerance * original)
		return false;
	for (double& x : r)
		x /= residual;
	basis.vectors.push_back(std::move(r));
	return true;
}

OrthonormalBasis orthonormalize(std::span<const std::vector<double>> vectors, std::size_t dim) {
	OrthonormalBasis basis;
	basis.dim = dim;
	for (const auto& input : vectors)
		append_orthonormal(basis, input);
	return basis;
}

OrthonormalBasis orthonormalize_rows(const Matrix& rows, std::span<const std::size_t> indices) {
	std::vector<std::vector<double>> vectors;
	vectors.reserve(indices.size());
	for (std::size_t idx : indices) {
		auto r = rows.row(idx);
		vectors.emplace_back(r.begin(), r.end());
	}
	return orthonormalize(vectors, rows.cols());
}

Projector nullspace_projector(const OrthonormalBasis& basis) {
	const std::size_t n = basis.dim;
	Projector p{Matrix::identity(n), n - std::min(n, basis.size())};
	for (std::size_t i = 0; i < n; ++i) {
		for (std::size_t j = i; j < n; ++j) {
			double s = 0.0;
			for (const auto& q : basis.vectors)
				s += q[i] * q[j];
			p.matrix(i, j) -= s;
			if (j != i)
				p.matrix(j, i) = p.matrix(i, j);
		}
	}
	return p;
}

MinEigenspace min_eigenspace_projector(const SymmetricEigenSystem& eig, double mult_tol) {
	const std::size_t n = eig.dim();
	if (n == 0)
		return {};
	const double lambda_min = eig.values.back();
	const double threshold = mult_tol * std::max(eig.values.front(), 1e-30);

	std::size_t mu = 0;
	for (double v : eig.values)
		if (v - lambda_min <= threshold)
			++mu;

	MinEigenspace out;
	out.multiplicity = mu;
	out.projector.subspace_dim = mu;
	out.projector.matrix = Matrix(n, n);
	for (std::size_t col = n - mu; col < n; ++col) {
		for (std::size_t i = 0; i < n; ++i) {
			const double ui = eig.vectors(i, col);
			for (std::size_t j = i; j < n; ++j)
				out.projector.matrix(i, j) += ui * eig.vectors(j, col);
		}
	}
	for (std::size_t i = 0; i < n; ++i)
		for (std::size_t j = 0; j < i; ++j)
			out.projector.matrix(i, j) = out.projector.matrix(j, i);
	return out;
}

double secular_min_eigenvalue(std::span<const double> prior, std::span<const double> z,
                              std::size_t multiplicity) {
	const std::size_t n = prior.size();
	if (n == 0 || z.size() != n)
		throw InvalidInputError("secular_min_eigenvalue: spectrum and z must have equal, nonzero length");
	if (multiplicity == 0 || multiplicity > n)
		throw InvalidInputError("secular_min_eigenvalue: multiplicity out of range");
	for (std::size_t i = 0; i < n; ++i)
		if (!std::isfinite(prior[i]) || !std::isfinite(z[i]))
			throw InvalidInputError("secular_min_eigenvalue: non-finite input");

	const std::size_t m = n - multiplicity; // first index of the minimum cluster
	const double lo = prior[m];

	double zeta = 0.0;
	for (std::size_t i = m; i < n; ++i)
		zeta += z[i] * z[i];
	if (zeta == 0.0)
		return lo;
	if (m == 0)
		return lo + zeta;

	// The root never exceeds lo + zeta (the outer sum is positive on the bracket)
	// and, by interlacing, never exceeds prior[m - 1].
	const double hi = std::min(prior[m - 1], lo + zeta);
	if (!(hi > lo))
		return lo;

	auto secular = [&](double lambda) {
		double f = 1.0 - zeta / (lambda - lo);
		for (std::size_t i = 0; i < m; ++i)
			if (z[i] != 0.0)
				f += z[i] * z[i] / (prior[i] - lambda);
		return f;
	};

	const double margin = 1e-12 * (hi - lo);
	double a = lo + margin;
	double b = hi - margin;
	if (secular(a) >= 0.0)
		return a;
	if (secular(b) <= 0.0)
		return hi;

	for (int iter = 0; iter < 200; ++iter) {
		const double mid = 0.5 * (a + b);
		if (secular(mid) < 0.0)
			a = mid;
		else
			b = mid;
		if (b - a <= 1e-14 * (1.0 + std::abs(mid)))
			return 0.5 * (a + b);
	}
	throw NumericFailureError("secular_min_eigenvalue: bisection did not converge");
}

namespace {

// Dot product of the first `len` entries with four running sums, which lets
// the compiler keep the loop in vector registers.
inline double prefix_dot(const double* x, const double* y, std::size_t len) noexcept {
	double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
	std::size_t k = 0;
	for (; k + 4 <= len; k += 4) {
		s0 += x[k] * y[k];
		s1 += x[k + 1] * y[k + 1];
		s2 += x[k + 2] * y[k + 2];
		s3 += x[k + 3] * y[k + 3];
	}
	for (; k < len; ++k)
		s0 += x[k] * y[k];
	return (s0 + s1) + (s2 + s3);
}

} // namespace

bool cholesky_in_place(Matrix& a) noexcept {
	const std::size_t n = a.rows();
	double* base = a.data().data();
	for (std::size_t j = 0; j < n; ++j) {
		double* rj = base + j * n;
		const double d = rj[j] - prefix_dot(rj, rj, j);
		if (!(d > 0.0))
			return false;
		const double ljj = std::sqrt(d);
		rj[j] = ljj;
		const double inv = 1.0 / ljj;
		for (std::size_t i = j + 1; i < n; ++i) {
			double* ri = base + i * n;
			ri[j] = (ri[j] - prefix_dot(ri, rj, j)) * inv;
		}
		for (std::size_t k = j + 1; k < n; ++k)
			rj[k] = 0.0;
	}
	return true;
}

double cholesky_log_det(const Matrix& l) noexcept {
	double s = 0.0;
	for (std::size_t i = 0; i < l.rows(); ++i)
		s += std::log(l(i, i));
	return 2.0 * s;
}

void forward_substitute(const Matrix& l, std::span<double> b) noexcept {
	const std::size_t n = l.rows();
	const double* base = l.data().data();
	for (std::size_t i = 0; i < n; ++i) {
		const double* li = base + i * n;
		b[i] = (b[i] - prefix_dot(li, b.data(), i)) / li[i];
	}
}

} // namespace splace::linalg
