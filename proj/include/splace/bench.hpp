#pragma once

#include <splace/ensembles.hpp>
#include <splace/placement.hpp>

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace splace::bench {

inline constexpr int kSchemaVersion = 1;

/// Monte-Carlo campaign description. Thresholds are in index form: a record
/// satisfies wcev_threshold when its WCEV index (1 / lambda_n) is at or below
/// it, and likewise for the MSE index.
struct BenchmarkConfig {
	ensembles::EnsembleSpec ensemble;
	std::size_t trials = 1;
	std::vector<Algorithm> algorithms;
	std::size_t k_min = 0;
	std::size_t k_max = 0;
	std::optional<Criterion> local_opt;
	std::optional<double> wcev_threshold;
	std::optional<double> mse_threshold;
	std::string records_path;
	std::string summary_path;
	/// When false the runtime column is written as 0 so repeated runs are byte-identical.
	bool record_runtime = true;
	/// 0 picks the hardware concurrency.
	unsigned workers = 0;

	/// Throws ConfigError.
	void validate() const;
};

struct TrialRecord {
	std::size_t trial = 0;
	Algorithm algorithm = Algorithm::mpme;
	std::size_t k = 0;
	double mse_index = 0.0;
	double wcev_index = 0.0;
	double condition_number = 0.0;
	double runtime_seconds = 0.0;
	bool satisfied = false;
	std::optional<std::size_t> M_required;
};

/// Means over trials for one (algorithm, k).
struct SummaryRow {
	Algorithm algorithm = Algorithm::mpme;
	std::size_t k = 0;
	double mean_mse_index = 0.0;
	double mean_wcev_index = 0.0;
	double mean_condition_number = 0.0;
	double finite_condition_fraction = 0.0;
	double mean_runtime_seconds = 0.0;
	double satisfied_fraction = 0.0;
};

struct CampaignReport {
	BenchmarkConfig config;
	std::vector<TrialRecord> records;
	std::vector<SummaryRow> summary;
	/// First k in the sensor range whose mean index meets the threshold.
	std::map<Algorithm, std::optional<std::size_t>> m_from_mean_wcev;
	std::map<Algorithm, std::optional<std::size_t>> m_from_mean_mse;
	/// Pools that needed a redraw, by trial.
	std::map<std::size_t, unsigned> regenerated_trials;
};

/// Runs every (trial, algorithm, k). Records are ordered by trial, then
/// algorithm name, then k, whatever order the workers finish in.
CampaignReport run_campaign(const BenchmarkConfig& config);

BenchmarkConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BenchmarkConfig& config);

/// Column names of the records CSV.
inline constexpr const char* kRecordColumns =
	"trial,algorithm,k,mse_index,wcev_index,condition_number,runtime_seconds,satisfied,M_required";

void write_records_csv(std::ostream& out, const std::vector<TrialRecord>& records);
nlohmann::json summary_json(const CampaignReport& report);

/// Writes the records CSV and summary JSON to the configured paths.
void write_campaign_outputs(const CampaignReport& report);

/// Plain CSV, one candidate per line, no header. Throws ParseError.
Matrix read_matrix_csv(std::istream& in);
Matrix read_matrix_file(const std::string& path);

/// Reads a JSON document; ConfigError on I/O or syntax problems.
nlohmann::json read_json_file(const std::string& path);

struct PlaceRequest {
	std::string matrix_path;
	Algorithm algorithm = Algorithm::mpme;
	StoppingRule rule;
	std::optional<Criterion> local_opt;
	std::uint64_t seed = 0;
};

/// Loads the matrix, runs the algorithm and returns the result document:
/// selected (0-based), M, lambda_min, wcev_index, mse_index, condition_number,
/// satisfied, algorithm, schema_version.
nlohmann::json place_file(const PlaceRequest& request);

/// JSON document describing a placement on a pool.
nlohmann::json result_json(const CandidatePool& pool, const PlacementResult& result);

struct TimingConfig {
	std::size_t n = 20;
	std::size_t M = 20;
	std::vector<std::size_t> sweep{100, 200, 400, 800};
	std::vector<Algorithm> algorithms{Algorithm::mpme, Algorithm::mnep};
	std::size_t trials = 3;
	std::uint64_t seed = 0;
	std::string out_path;

	/// Throws ConfigError.
	void validate() const;
};

struct TimingRow {
	Algorithm algorithm = Algorithm::mpme;
	std::size_t N = 0;
	double mean_seconds = 0.0;
};

struct TimingReport {
	std::vector<TimingRow> rows;
	/// Least-squares slope of log(mean time) against log N.
	std::map<Algorithm, double> slopes;
};

/// Times each algorithm on fresh gaussian pools for every N in the sweep.
/// One untimed warm-up run precedes the timed trials of each (algorithm, N).
TimingReport timing_study(const TimingConfig& config);

TimingConfig timing_config_from_json(const nlohmann::json& j);
void write_timing_csv(std::ostream& out, const TimingReport& report);
nlohmann::json timing_json(const TimingReport& report);

/// Least-squares slope of y against x.
double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Runs one algorithm at a fixed sensor count, with the seed used by random.
PlacementResult run_fixed(const CandidatePool& pool, Algorithm algorithm, std::size_t m, std::uint64_t seed);

} // namespace splace::bench
