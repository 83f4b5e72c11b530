#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace splace {

/// Dense row-major real matrix.
///
/// Rows of a candidate pool are observation vectors, so row access is the
/// hot path and is exposed as contiguous spans.
class Matrix {
public:
	Matrix() = default;
	Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

	static Matrix identity(std::size_t n);
	static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
	static Matrix from_rows(const std::vector<std::vector<double>>& rows);

	std::size_t rows() const noexcept { return rows_; }
	std::size_t cols() const noexcept { return cols_; }
	bool empty() const noexcept { return entries_.empty(); }

	double& operator()(std::size_t i, std::size_t j) noexcept { return entries_[i * cols_ + j]; }
	double operator()(std::size_t i, std::size_t j) const noexcept { return entries_[i * cols_ + j]; }

	std::span<double> row(std::size_t i) noexcept { return {entries_.data() + i * cols_, cols_}; }
	std::span<const double> row(std::size_t i) const noexcept { return {entries_.data() + i * cols_, cols_}; }

	std::span<const double> data() const noexcept { return entries_; }
	std::span<double> data() noexcept { return entries_; }

	bool all_finite() const noexcept;
	bool is_square() const noexcept { return rows_ == cols_; }

	Matrix transpose() const;
	double max_abs() const noexcept;
	double frobenius_norm() const noexcept;

	friend bool operator==(const Matrix&, const Matrix&) = default;

private:
	std::size_t rows_ = 0;
	std::size_t cols_ = 0;
	std::vector<double> entries_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);

/// y = A x
std::vector<double> multiply(const Matrix& a, std::span<const double> x);

double dot(std::span<const double> a, std::span<const double> b) noexcept;
double squared_norm(std::span<const double> v) noexcept;

/// A += scale * v v^T on a square matrix.
void add_outer(Matrix& a, std::span<const double> v, double scale = 1.0) noexcept;

/// A^T A
Matrix gram(const Matrix& a);

/// Sum of v v^T over the listed rows of `rows`.
Matrix gram_of_rows(const Matrix& rows, std::span<const std::size_t> indices);

/// Max-norm of A - A^T.
double asymmetry(const Matrix& a) noexcept;

/// ||A - B||_max
double max_abs_diff(const Matrix& a, const Matrix& b) noexcept;

} // namespace splace
