#pragma once

#include <splace/matrix.hpp>

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace splace::metrics {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Eigenvalues at or below this fraction of max(lambda_1, 1e-30) count as zero.
inline constexpr double kSingularityFloor = 1e-12;

struct NoiseModel {
	double variance = 1.0;

	explicit NoiseModel(double sigma2);
};

/// Error indicators of a dual matrix, with the noise variance factored out.
/// Singular duals report +inf for the inverse-based indices.
struct MetricReport {
	double mse_index = kInfinity;
	double wcev_index = kInfinity;
	double condition_number = kInfinity;
	double frame_potential = 0.0;
	double lambda_min = 0.0;
	double lambda_max = 0.0;
};

bool is_singular(std::span<const double> eigenvalues_desc) noexcept;

/// tr(Psi^{-1}), +inf when singular.
double mse_index(const Matrix& dual);
double mse_index_from_eigenvalues(std::span<const double> eigenvalues_desc) noexcept;

/// 1 / lambda_min(Psi), +inf when singular.
double wcev_index(const Matrix& dual);
double wcev_index_from_eigenvalues(std::span<const double> eigenvalues_desc) noexcept;

/// lambda_max / lambda_min, +inf when singular.
double condition_number(const Matrix& dual);

/// Sum over ordered pairs (including i = j) of (phi_i^T phi_j)^2.
double frame_potential(const Matrix& rows);
double frame_potential(const Matrix& pool, std::span<const std::size_t> selected);

/// Builds Psi = sum phi_i phi_i^T over `selected` and evaluates every index.
MetricReport evaluate(const Matrix& pool, std::span<const std::size_t> selected);

/// Minimum variance unbiased estimate (Phi^T Phi)^{-1} Phi^T y.
/// Throws RankDeficiencyError if Phi^T Phi is singular.
std::vector<double> mvue_estimate(const Matrix& phi, std::span<const double> y);

/// f = Phi_tilde alpha over the whole candidate set.
std::vector<double> reconstruct_field(const Matrix& pool, std::span<const double> alpha);

} // namespace splace::metrics
