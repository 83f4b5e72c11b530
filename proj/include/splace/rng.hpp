#pragma once

#include <cstdint>

namespace splace::rng {

/// SplitMix64 step: advances `state` by the golden-ratio increment and returns
/// the mixed output. Used for seeding and for deriving sub-seeds.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// xoshiro256** seeded by four SplitMix64 outputs of the seed.
///
/// uniform() = (next() >> 11) * 2^-53 in [0, 1).
/// normal() is the Box-Muller transform on u1 = 1 - uniform(), u2 = uniform():
/// r = sqrt(-2 ln u1); the pair (r cos 2 pi u2, r sin 2 pi u2) is returned
/// cosine first, sine on the following call.
class Xoshiro256 {
public:
	explicit Xoshiro256(std::uint64_t seed) noexcept;

	std::uint64_t next() noexcept;
	double uniform() noexcept;
	double normal() noexcept;
	/// Unbiased integer in [0, bound) by rejection; bound must be positive.
	std::uint64_t below(std::uint64_t bound) noexcept;

private:
	std::uint64_t s_[4];
	double spare_ = 0.0;
	bool has_spare_ = false;
};

} // namespace splace::rng
