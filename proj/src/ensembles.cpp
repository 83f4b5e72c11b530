#include <splace/ensembles.hpp>
#include <splace/errors.hpp>
#include <splace/rng.hpp>

#include <cmath>
#include <optional>
#include <string>

namespace splace::ensembles {

std::string_view to_string(EnsembleKind kind) noexcept {
	switch (kind) {
	case EnsembleKind::gaussian: return "gaussian";
	case EnsembleKind::bernoulli: return "bernoulli";
	case EnsembleKind::row_normalized_gaussian: return "row_normalized_gaussian";
	}
	return "unknown";
}

EnsembleKind parse_kind(std::string_view name) {
	for (auto k : {EnsembleKind::gaussian, EnsembleKind::bernoulli, EnsembleKind::row_normalized_gaussian})
		if (to_string(k) == name)
			return k;
	throw ConfigError("unknown ensemble kind '" + std::string(name) + "'");
}

void EnsembleSpec::validate() const {
	if (n == 0 || N < n)
		throw InvalidInputError("ensemble spec needs N >= n >= 1");
}

namespace {

Matrix draw(const EnsembleSpec& spec, std::uint64_t seed) {
	rng::Xoshiro256 gen(seed);
	Matrix m(spec.N, spec.n);
	for (std::size_t i = 0; i < spec.N; ++i) {
		auto row = m.row(i);
		switch (spec.kind) {
		case EnsembleKind::gaussian:
			for (double& x : row)
				x = gen.normal();
			break;
		case EnsembleKind::bernoulli:
			for (double& x : row)
				x = static_cast<double>(gen.next() >> 63);
			break;
		case EnsembleKind::row_normalized_gaussian: {
			// A zero row has probability zero; redraw it rather than divide by zero.
			double norm = 0.0;
			do {
				for (double& x : row)
					x = gen.normal();
				norm = std::sqrt(squared_norm(row));
			} while (norm == 0.0);
			for (double& x : row)
				x /= norm;
			break;
		}
		}
	}
	return m;
}

} // namespace

GeneratedPool generate(const EnsembleSpec& spec) {
	spec.validate();
	for (unsigned attempt = 0; attempt <= kMaxAttempts; ++attempt) {
		const std::uint64_t seed = spec.seed ^ attempt;
		try {
			return GeneratedPool{CandidatePool(draw(spec, seed)), attempt, seed};
		} catch (const RankDeficiencyError&) {
		}
	}
	throw NumericFailureError("ensemble generation: every draw was rank deficient after " +
	                          std::to_string(kMaxAttempts) + " redraws");
}

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial) noexcept {
	std::uint64_t state = seed + trial * 0xD1B54A32D192ED03ULL;
	return rng::splitmix64(state);
}

} // namespace splace::ensembles
