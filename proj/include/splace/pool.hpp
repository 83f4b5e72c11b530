#pragma once

#include <splace/linalg.hpp>
#include <splace/matrix.hpp>

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace splace {

/// The N x n signal representation matrix; row i is the observation vector of
/// candidate location i.
///
/// Construction enforces N >= n >= 1, finite entries and full column rank
/// (sigma_min > 1e-10 sigma_max), throwing RankDeficiencyError otherwise.
class CandidatePool {
public:
	explicit CandidatePool(Matrix rows);

	const Matrix& matrix() const noexcept { return rows_; }
	std::size_t size() const noexcept { return rows_.rows(); }
	std::size_t dim() const noexcept { return rows_.cols(); }
	std::span<const double> row(std::size_t i) const noexcept { return rows_.row(i); }
	double row_squared_norm(std::size_t i) const noexcept { return squared_norms_[i]; }

private:
	Matrix rows_;
	std::vector<double> squared_norms_;
};

/// Incremental greedy state after k selections.
///
/// Holds Psi_k = sum of phi phi^T over the selection and the projector onto
/// the minimum eigenspace of Psi_k. Below n selections that eigenspace is the
/// null space of Phi_k and the projector is rebuilt from the Gram-Schmidt
/// basis after every selection; from n on it comes from a fresh
/// eigendecomposition, computed when first asked for. Single owner; the pool must outlive
/// the state.
class SelectionState {
public:
	explicit SelectionState(const CandidatePool& pool);

	const CandidatePool& pool() const noexcept { return *pool_; }
	std::span<const std::size_t> selected() const noexcept { return selected_; }
	std::size_t k() const noexcept { return selected_.size(); }
	bool is_selected(std::size_t i) const { return taken_.at(i); }

	const Matrix& dual() const noexcept { return dual_; }
	const linalg::Projector& projector() const;
	std::size_t multiplicity() const;

	/// Eigensystem of Psi_k; computed lazily below n selections.
	const linalg::SymmetricEigenSystem& eigensystem() const;

	/// lambda_n(Psi_k); zero while k < n.
	double lambda_min() const;

	/// ||P_k phi_i||^2. Throws InvalidInputError if i is out of range or taken.
	double projection_score(std::size_t i) const;

	/// Appends candidate i and refreshes the dual matrix and projector.
	void extend(std::size_t i);

private:
	void refresh_projector() const;

	const CandidatePool* pool_;
	std::vector<std::size_t> selected_;
	std::vector<bool> taken_;
	Matrix dual_;
	linalg::OrthonormalBasis basis_;
	mutable linalg::Projector projector_;
	mutable std::size_t multiplicity_;
	mutable bool projector_stale_ = false;
	mutable std::optional<linalg::SymmetricEigenSystem> eig_;
};

SelectionState init_state(const CandidatePool& pool);
double projection_score(const SelectionState& state, std::size_t candidate);
SelectionState extend_state(SelectionState state, std::size_t index);

} // namespace splace
