#pragma once

#include <splace/pool.hpp>

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace splace::ensembles {

enum class EnsembleKind { gaussian, bernoulli, row_normalized_gaussian };

std::string_view to_string(EnsembleKind kind) noexcept;
/// Throws ConfigError on unknown names.
EnsembleKind parse_kind(std::string_view name);

struct EnsembleSpec {
	EnsembleKind kind = EnsembleKind::gaussian;
	std::size_t N = 100;
	std::size_t n = 20;
	std::uint64_t seed = 0;

	/// Throws InvalidInputError unless N >= n >= 1.
	void validate() const;
};

struct GeneratedPool {
	CandidatePool pool;
	/// 0 when the first draw was full rank.
	unsigned attempts = 0;
	std::uint64_t seed_used = 0;
};

inline constexpr unsigned kMaxAttempts = 5;

/// Draws a pool from the ensemble with a xoshiro256** stream seeded by
/// spec.seed. Entries are generated row by row. A rank-deficient draw is
/// redrawn with seed ^ attempt (attempt = 1, 2, ...); after kMaxAttempts
/// failed redraws NumericFailureError is thrown.
GeneratedPool generate(const EnsembleSpec& spec);

/// Seed of Monte-Carlo trial t: one SplitMix64 output from the state
/// seed + t * 0xD1B54A32D192ED03.
std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial) noexcept;

} // namespace splace::ensembles
