#include <splace/rng.hpp>

#include <cmath>
#include <numbers>

namespace splace::rng {

namespace {
constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }
} // namespace

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
	std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
	z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
	z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
	return z ^ (z >> 31);
}

Xoshiro256::Xoshiro256(std::uint64_t seed) noexcept {
	std::uint64_t sm = seed;
	for (auto& word : s_)
		word = splitmix64(sm);
}

std::uint64_t Xoshiro256::next() noexcept {
	const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
	const std::uint64_t t = s_[1] << 17;
	s_[2] ^= s_[0];
	s_[3] ^= s_[1];
	s_[1] ^= s_[2];
	s_[0] ^= s_[3];
	s_[2] ^= t;
	s_[3] = rotl(s_[3], 45);
	return result;
}

double Xoshiro256::uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Xoshiro256::normal() noexcept {
	if (has_spare_) {
		has_spare_ = false;
		return spare_;
	}
	const double u1 = 1.0 - uniform();
	const double u2 = uniform();
	const double r = std::sqrt(-2.0 * std::log(u1));
	const double angle = 2.0 * std::numbers::pi * u2;
	spare_ = r * std::sin(angle);
	has_spare_ = true;
	return r * std::cos(angle);
}

std::uint64_t Xoshiro256::below(std::uint64_t bound) noexcept {
	const std::uint64_t threshold = (0 - bound) % bound;
	for (;;) {
		const std::uint64_t r = next();
		if (r >= threshold)
			return r % bound;
	}
}

} // namespace splace::rng
