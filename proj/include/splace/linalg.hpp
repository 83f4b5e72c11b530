#pragma once

#include <splace/matrix.hpp>

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace splace::linalg {

/// Eigenvalues in nonincreasing order; column i of `vectors` pairs with values[i].
struct SymmetricEigenSystem {
	std::vector<double> values;
	Matrix vectors;

	std::size_t dim() const noexcept { return values.size(); }
	std::vector<double> vector(std::size_t i) const;
	double min_value() const { return values.back(); }
};

struct OrthonormalBasis {
	std::size_t dim = 0;
	std::vector<std::vector<double>> vectors;

	std::size_t size() const noexcept { return vectors.size(); }
};

/// Orthogonal projector onto a subspace of R^dim.
struct Projector {
	Matrix matrix;
	std::size_t subspace_dim = 0;

	std::size_t dim() const noexcept { return matrix.rows(); }
	/// ||P v||^2
	double squared_projection(std::span<const double> v) const;
};

struct MinEigenspace {
	Projector projector;
	std::size_t multiplicity = 0;
};

inline constexpr double kJacobiRelTolerance = 1e-12;
inline constexpr std::size_t kJacobiMaxSweeps = 100;
inline constexpr double kGramSchmidtDropTolerance = 1e-10;
inline constexpr double kMultiplicityTolerance = 1e-8;

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// The input is symmetrized; it must already be symmetric within 1e-10
/// (relative to max(1, ||A||_max)). Each eigenvector's largest-magnitude
/// component is made positive, lowest index winning ties.
SymmetricEigenSystem sym_eigendecompose(const Matrix& a);

/// Same iteration without accumulating eigenvectors.
std::vector<double> sym_eigenvalues(const Matrix& a);

/// Singular values (nonincreasing) by one-sided Jacobi; relative accuracy is
/// preserved for small singular values, which the rank check relies on.
std::vector<double> singular_values(const Matrix& a);

/// Modified Gram-Schmidt with one re-orthogonalization pass. Inputs whose
/// residual falls to 1e-10 of their original norm (or below) are dropped.
OrthonormalBasis orthonormalize(std::span<const std::vector<double>> vectors, std::size_t dim);

/// One step of the same process: orthonormalizes v against the basis and
/// appends it. Returns false when v is dropped.
bool append_orthonormal(OrthonormalBasis& basis, std::span<const double> v);

/// Same, over the rows of a matrix.
OrthonormalBasis orthonormalize_rows(const Matrix& rows, std::span<const std::size_t> indices);

/// I - R R^T for the basis R.
Projector nullspace_projector(const OrthonormalBasis& basis);

/// Projector onto the eigenvectors whose eigenvalue lies within
/// mult_tol * max(lambda_1, 1e-30) of the minimum.
MinEigenspace min_eigenspace_projector(const SymmetricEigenSystem& eig,
                                       double mult_tol = kMultiplicityTolerance);

/// Root of the rank-one secular equation for the eigenvalue that leaves the
/// minimum cluster of `prior` when z z^T is added to diag(prior).
///
/// `prior` is nonincreasing and its last `multiplicity` entries form the
/// minimum cluster. Returns eigenvalue number n - multiplicity (0-based) of
/// diag(prior) + z z^T.
double secular_min_eigenvalue(std::span<const double> prior, std::span<const double> z,
                              std::size_t multiplicity);

/// In-place lower Cholesky factor. Returns false if the matrix is not
/// numerically positive definite; the contents are then unspecified.
bool cholesky_in_place(Matrix& a) noexcept;

/// log det of a factor produced by cholesky_in_place.
double cholesky_log_det(const Matrix& l) noexcept;

/// Solves L y = b in place.
void forward_substitute(const Matrix& l, std::span<double> b) noexcept;

} // namespace splace::linalg
