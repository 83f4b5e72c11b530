#pragma once

#include <stdexcept>
#include <string>

namespace splace {

/// Malformed or out-of-contract arguments (non-finite entries, bad shapes, duplicates).
class InvalidInputError : public std::invalid_argument {
public:
	using std::invalid_argument::invalid_argument;
};

/// An iterative routine hit its iteration cap without meeting its tolerance.
class NumericFailureError : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

/// The candidate pool (or a selection) cannot support a nonsingular dual matrix.
class RankDeficiencyError : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

/// Input files that cannot be parsed.
class ParseError : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

/// Inconsistent benchmark or CLI configuration.
class ConfigError : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

} // namespace splace
