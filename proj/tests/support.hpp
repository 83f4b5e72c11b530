#pragma once

// Shared fixtures for the test binaries. Random instances come from
// std::mt19937_64 so they are independent of the library's own generator,
// and Eigen serves as an outside reference for dense linear algebra.

#include <splace/matrix.hpp>
#include <splace/pool.hpp>

#include <Eigen/Dense>

#include <random>
#include <vector>

namespace testing_support {

inline splace::Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& gen) {
	std::normal_distribution<double> dist(0.0, 1.0);
	splace::Matrix m(rows, cols);
	for (double& x : m.data())
		x = dist(gen);
	return m;
}

inline splace::Matrix random_symmetric(std::size_t n, std::mt19937_64& gen) {
	auto a = random_matrix(n, n, gen);
	splace::Matrix s(n, n);
	for (std::size_t i = 0; i < n; ++i)
		for (std::size_t j = 0; j < n; ++j)
			s(i, j) = 0.5 * (a(i, j) + a(j, i));
	return s;
}

inline Eigen::MatrixXd to_eigen(const splace::Matrix& m) {
	Eigen::MatrixXd e(m.rows(), m.cols());
	for (std::size_t i = 0; i < m.rows(); ++i)
		for (std::size_t j = 0; j < m.cols(); ++j)
			e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(i, j);
	return e;
}

// Eigenvalues by Eigen, nonincreasing.
inline std::vector<double> reference_eigenvalues(const splace::Matrix& m) {
	Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(to_eigen(m), Eigen::EigenvaluesOnly);
	std::vector<double> v(solver.eigenvalues().data(), solver.eigenvalues().data() + solver.eigenvalues().size());
	return {v.rbegin(), v.rend()};
}

// Rows r1 = [1, 0], r2 = [0, 1], r3 = [1, 1].
inline splace::CandidatePool three_row_pool() {
	return splace::CandidatePool(splace::Matrix::from_rows({{1, 0}, {0, 1}, {1, 1}}));
}

} // namespace testing_support
