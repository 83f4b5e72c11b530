#include <splace/matrix.hpp>

#include <splace/errors.hpp>

#include <algorithm>
#include <cmath>

namespace splace {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
	: rows_(rows), cols_(cols), entries_(rows * cols, fill) {}

Matrix Matrix::identity(std::size_t n) {
	Matrix m(n, n);
	for (std::size_t i = 0; i < n; ++i)
		m(i, i) = 1.0;
	return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
	std::vector<std::vector<double>> copy;
	copy.reserve(rows.size());
	for (const auto& r : rows)
		copy.emplace_back(r);
	return from_rows(copy);
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
	if (rows.empty())
		return {};
	const std::size_t cols = rows.front().size();
	Matrix m(rows.size(), cols);
	for (std::size_t i = 0; i < rows.size(); ++i) {
		if (rows[i].size() != cols)
			throw InvalidInputError("Matrix::from_rows: ragged rows");
		std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
	}
	return m;
}

bool Matrix::all_finite() const noexcept {
	return std::all_of(entries_.begin(), entries_.end(), [](double v) { return std::isfinite(v); });
}

Matrix Matrix::transpose() const {
	Matrix t(cols_, rows_);
	for (std::size_t i = 0; i < rows_; ++i)
		for (std::size_t j = 0; j < cols_; ++j)
			t(j, i) = (*this)(i, j);
	return t;
}

double Matrix::max_abs() const noexcept {
	double m = 0.0;
	for (double v : entries_)
		m = std::max(m, std::abs(v));
	return m;
}

double Matrix::frobenius_norm() const noexcept {
	double s = 0.0;
	for (double v : entries_)
		s += v * v;
	return std::sqrt(s);
}

Matrix operator*(const Matrix& a, const Matrix& b) {
	if (a.cols() != b.rows())
		throw InvalidInputError("matrix product: dimension mismatch");
	Matrix c(a.rows(), b.cols());
	for (std::size_t i = 0; i < a.rows(); ++i)
		for (std::size_t k = 0; k < a.cols(); ++k) {
			const double aik = a(i, k);
			if (aik == 0.0)
				continue;
			auto crow = c.row(i);
			auto brow = b.row(k);
			for (std::size_t j = 0; j < b.cols(); ++j)
				crow[j] += aik * brow[j];
		}
	return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
	if (a.rows() != b.rows() || a.cols() != b.cols())
		throw InvalidInputError("matrix difference: dimension mismatch");
	Matrix c = a;
	auto cd = c.data();
	auto bd = b.data();
	for (std::size_t i = 0; i < cd.size(); ++i)
		cd[i] -= bd[i];
	return c;
}

std::vector<double> multiply(const Matrix& a, std::span<const double> x) {
	if (a.cols() != x.size())
		throw InvalidInputError("matrix-vector product: dimension mismatch");
	std::vector<double> y(a.rows());
	for (std::size_t i = 0; i < a.rows(); ++i)
		y[i] = dot(a.row(i), x);
	return y;
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
	double s = 0.0;
	for (std::size_t i = 0; i < a.size(); ++i)
		s += a[i] * b[i];
	return s;
}

double squared_norm(std::span<const double> v) noexcept { return dot(v, v); }

void add_outer(Matrix& a, std::span<const double> v, double scale) noexcept {
	const std::size_t n = v.size();
	for (std::size_t i = 0; i < n; ++i) {
		const double vi = scale * v[i];
		auto arow = a.row(i);
		for (std::size_t j = 0; j < n; ++j)
			arow[j] += vi * v[j];
	}
}

Matrix gram(const Matrix& a) {
	Matrix g(a.cols(), a.cols());
	for (std::size_t r = 0; r < a.rows(); ++r)
		add_outer(g, a.row(r));
	return g;
}

Matrix gram_of_rows(const Matrix& rows, std::span<const std::size_t> indices) {
	Matrix g(rows.cols(), rows.cols());
	for (std::size_t idx : indices)
		add_outer(g, rows.row(idx));
	return g;
}

double asymmetry(const Matrix& a) noexcept {
	double m = 0.0;
	for (std::size_t i = 0; i < a.rows(); ++i)
		for (std::size_t j = i + 1; j < a.cols(); ++j)
			m = std::max(m, std::abs(a(i, j) - a(j, i)));
	return m;
}

double max_abs_diff(const Matrix& a, const Matrix& b) noexcept {
	double m = 0.0;
	auto ad = a.data();
	auto bd = b.data();
	for (std::size_t i = 0; i < ad.size(); ++i)
		m = std::max(m, std::abs(ad[i] - bd[i]));
	return m;
}

} // namespace splace
