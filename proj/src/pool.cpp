#include <splace/errors.hpp>
#include <splace/pool.hpp>

#include <string>

namespace splace {

CandidatePool::CandidatePool(Matrix rows) : rows_(std::move(rows)) {
	const std::size_t big_n = rows_.rows();
	const std::size_t n = rows_.cols();
	if (n == 0 || big_n == 0)
		throw InvalidInputError("CandidatePool: empty matrix");
	if (!rows_.all_finite())
		throw InvalidInputError("CandidatePool: non-finite entry");
	if (big_n < n)
		throw RankDeficiencyError("CandidatePool: " + std::to_string(big_n) + " candidates cannot span " +
		                          std::to_string(n) + " parameters");

	const auto sv = linalg::singular_values(rows_);
	if (!(sv.back() > 1e-10 * sv.front()))
		throw RankDeficiencyError("CandidatePool: matrix is not full column rank");

	squared_norms_.resize(big_n);
	for (std::size_t i = 0; i < big_n; ++i)
		squared_norms_[i] = squared_norm(rows_.row(i));
}

SelectionState::SelectionState(const CandidatePool& pool)
	: pool_(&pool),
	  taken_(pool.size(), false),
	  dual_(pool.dim(), pool.dim()),
	  basis_{pool.dim(), {}},
	  projector_{Matrix::identity(pool.dim()), pool.dim()},
	  multiplicity_(pool.dim()) {}

const linalg::Projector& SelectionState::projector() const {
	if (projector_stale_)
		refresh_projector();
	return projector_;
}

std::size_t SelectionState::multiplicity() const {
	if (projector_stale_)
		refresh_projector();
	return multiplicity_;
}

const linalg::SymmetricEigenSystem& SelectionState::eigensystem() const {
	if (!eig_)
		eig_ = linalg::sym_eigendecompose(dual_);
	return *eig_;
}

double SelectionState::lambda_min() const {
	if (k() < pool_->dim())
		return 0.0;
	return eigensystem().min_value();
}

double SelectionState::projection_score(std::size_t i) const {
	if (i >= pool_->size())
		throw InvalidInputError("projection_score: candidate index out of range");
	if (taken_[i])
		throw InvalidInputError("projection_score: candidate " + std::to_string(i) + " is already selected");
	return projector().squared_projection(pool_->row(i));
}

void SelectionState::extend(std::size_t i) {
	if (i >= pool_->size())
		throw InvalidInputError("extend: candidate index out of range");
	if (taken_[i])
		throw InvalidInputError("extend: candidate " + std::to_string(i) + " is already selected");
	taken_[i] = true;
	selected_.push_back(i);
	add_outer(dual_, pool_->row(i));
	eig_.reset();
	const std::size_t n = pool_->dim();
	if (k() >= n) {
		projector_stale_ = true;
		return;
	}
	// Below n the basis grows by one modified Gram-Schmidt step, which yields the
	// same vectors as orthonormalizing the whole selection again; the projector
	// is then rebuilt from that basis.
	if (linalg::append_orthonormal(basis_, pool_->row(i))) {
		projector_ = linalg::nullspace_projector(basis_);
		multiplicity_ = projector_.subspace_dim;
	}
}

void SelectionState::refresh_projector() const {
	auto minimum = linalg::min_eigenspace_projector(eigensystem());
	projector_ = std::move(minimum.projector);
	multiplicity_ = minimum.multiplicity;
	projector_stale_ = false;
}

SelectionState init_state(const CandidatePool& pool) { return SelectionState(pool); }

double projection_score(const SelectionState& state, std::size_t candidate) {
	return state.projection_score(candidate);
}

SelectionState extend_state(SelectionState state, std::size_t index) {
	state.extend(index);
	return state;
}

} // namespace splace
