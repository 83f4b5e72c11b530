#include "support.hpp"

#include <splace/bench.hpp>
#include <splace/errors.hpp>
#include <splace/metrics.hpp>

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

using namespace splace;
using namespace splace::bench;
using nlohmann::json;

namespace {

BenchmarkConfig small_config() {
	BenchmarkConfig c;
	c.ensemble = {ensembles::EnsembleKind::gaussian, 24, 4, 11};
	c.trials = 5;
	c.algorithms = {Algorithm::random, Algorithm::mpme, Algorithm::framesense, Algorithm::convex, Algorithm::mnep};
	c.k_min = 4;
	c.k_max = 9;
	c.wcev_threshold = 0.5;
	c.mse_threshold = 1.5;
	c.workers = 1;
	c.record_runtime = false;
	return c;
}

std::string csv_of(const CampaignReport& r) {
	std::ostringstream out;
	write_records_csv(out, r.records);
	return out.str();
}

std::string temp_path(const std::string& name) { return "/tmp/splace_test_" + name; }

void write_file(const std::string& path, const std::string& body) {
	std::ofstream(path) << body;
}

} // namespace

TEST_CASE("campaign record counts") {
	BenchmarkConfig tiny;
	tiny.ensemble = {ensembles::EnsembleKind::gaussian, 5, 2, 1};
	tiny.algorithms = {Algorithm::random};
	tiny.k_min = tiny.k_max = 2;
	CHECK(run_campaign(tiny).records.size() == 1);

	const auto c = small_config();
	const auto r = run_campaign(c);
	CHECK(r.records.size() == c.trials * c.algorithms.size() * (c.k_max - c.k_min + 1));
	CHECK(r.summary.size() == c.algorithms.size() * (c.k_max - c.k_min + 1));
}

TEST_CASE("records are ordered by trial, algorithm name, k") {
	const auto r = run_campaign(small_config());
	for (std::size_t i = 1; i < r.records.size(); ++i) {
		const auto& a = r.records[i - 1];
		const auto& b = r.records[i];
		const auto key = [](const TrialRecord& x) { return std::tuple(x.trial, std::string(to_string(x.algorithm)), x.k); };
		CHECK(key(a) < key(b));
	}
}

TEST_CASE("summary means equal the average of per-trial records") {
	const auto c = small_config();
	const auto r = run_campaign(c);
	for (const auto& row : r.summary) {
		double wcev = 0.0, mse = 0.0;
		std::size_t count = 0;
		for (const auto& rec : r.records)
			if (rec.algorithm == row.algorithm && rec.k == row.k) {
				wcev += rec.wcev_index;
				mse += rec.mse_index;
				++count;
			}
		CHECK(count == c.trials);
		CHECK(std::abs(row.mean_wcev_index - wcev / c.trials) <= 1e-12 * std::max(1.0, row.mean_wcev_index));
		CHECK(std::abs(row.mean_mse_index - mse / c.trials) <= 1e-12 * std::max(1.0, row.mean_mse_index));
	}
}

TEST_CASE("records match an independent evaluation of the same pool") {
	const auto c = small_config();
	const auto r = run_campaign(c);
	// Trial 2, MPME at k = 6: regenerate the pool and run the algorithm directly.
	ensembles::EnsembleSpec spec = c.ensemble;
	spec.seed = ensembles::trial_seed(c.ensemble.seed, 2);
	const auto pool = ensembles::generate(spec).pool;
	const auto placed = run_mpme(pool, StoppingRule::fixed(6));
	const auto expected = metrics::evaluate(pool.matrix(), placed.selected);
	bool found = false;
	for (const auto& rec : r.records)
		if (rec.trial == 2 && rec.algorithm == Algorithm::mpme && rec.k == 6) {
			found = true;
			CHECK(rec.wcev_index == expected.wcev_index);
			CHECK(rec.mse_index == expected.mse_index);
			CHECK(rec.satisfied == (rec.wcev_index <= 0.5 && rec.mse_index <= 1.5));
			const auto threshold_run = run_mpme(pool, StoppingRule::wcev(2.0));
			REQUIRE(rec.M_required.has_value());
			CHECK(*rec.M_required == threshold_run.M());
		}
	CHECK(found);
}

TEST_CASE("identical config gives byte-identical records") {
	auto c = small_config();
	const std::string first = csv_of(run_campaign(c));
	c.workers = 3;
	CHECK(csv_of(run_campaign(c)) == first);
	CHECK(first.rfind(std::string(kRecordColumns) + "\n", 0) == 0);
}

TEST_CASE("local optimization never worsens the campaign criterion") {
	auto plain = small_config();
	plain.algorithms = {Algorithm::framesense};
	auto refined = plain;
	refined.local_opt = Criterion::wcev;
	const auto a = run_campaign(plain);
	const auto b = run_campaign(refined);
	REQUIRE(a.records.size() == b.records.size());
	for (std::size_t i = 0; i < a.records.size(); ++i)
		CHECK(b.records[i].wcev_index <= a.records[i].wcev_index * (1 + 1e-12));
}

TEST_CASE("M from the mean curve is the first k meeting the threshold") {
	const auto r = run_campaign(small_config());
	for (const auto& [alg, m] : r.m_from_mean_wcev) {
		std::optional<std::size_t> expected;
		for (const auto& row : r.summary)
			if (row.algorithm == alg && !expected && row.mean_wcev_index <= 0.5)
				expected = row.k;
		CHECK(m == expected);
	}
}

TEST_CASE("campaign config validation") {
	auto c = small_config();
	c.trials = 0;
	CHECK_THROWS_AS(run_campaign(c), ConfigError);
	c = small_config();
	c.k_min = 3;
	CHECK_THROWS_AS(run_campaign(c), ConfigError);
	c = small_config();
	c.k_max = 25;
	CHECK_THROWS_AS(run_campaign(c), ConfigError);
	c = small_config();
	c.algorithms.push_back(Algorithm::oracle);
	CHECK_THROWS_AS(run_campaign(c), ConfigError);
	c = small_config();
	c.algorithms = {};
	CHECK_THROWS_AS(run_campaign(c), ConfigError);
}

TEST_CASE("campaign config JSON round trip and errors") {
	const auto c = small_config();
	const auto back = config_from_json(to_json(c));
	CHECK(to_json(back) == to_json(c));

	auto j = to_json(c);
	j["surprise"] = 1;
	CHECK_THROWS_AS(config_from_json(j), ConfigError);
	j = to_json(c);
	j["trials"] = "many";
	CHECK_THROWS_AS(config_from_json(j), ConfigError);
	j = to_json(c);
	j.erase("ensemble");
	CHECK_THROWS_AS(config_from_json(j), ConfigError);
	j = to_json(c);
	j["algorithms"] = {"mpme", "simulated_annealing"};
	CHECK_THROWS_AS(config_from_json(j), ConfigError);
	j = to_json(c);
	j["sensor_range"] = {4};
	CHECK_THROWS_AS(config_from_json(j), ConfigError);
	j = to_json(c);
	j["ensemble"]["kind"] = "cauchy";
	CHECK_THROWS_AS(config_from_json(j), ConfigError);
}

TEST_CASE("campaign outputs: CSV columns and JSON summary") {
	auto c = small_config();
	c.records_path = temp_path("records.csv");
	c.summary_path = temp_path("summary.json");
	const auto r = run_campaign(c);
	write_campaign_outputs(r);
	std::ifstream csv(c.records_path);
	std::string header;
	std::getline(csv, header);
	CHECK(header == "trial,algorithm,k,mse_index,wcev_index,condition_number,runtime_seconds,satisfied,M_required");
	std::size_t lines = 0;
	for (std::string line; std::getline(csv, line);)
		++lines;
	CHECK(lines == r.records.size());
	const auto summary = read_json_file(c.summary_path);
	CHECK(summary["schema_version"] == kSchemaVersion);
	CHECK(summary["summary"].size() == r.summary.size());
	std::remove(c.records_path.c_str());
	std::remove(c.summary_path.c_str());
}

TEST_CASE("singular records print inf in CSV and null in JSON") {
	TrialRecord rec;
	rec.algorithm = Algorithm::random;
	rec.k = 2;
	rec.mse_index = rec.wcev_index = rec.condition_number = metrics::kInfinity;
	std::ostringstream out;
	write_records_csv(out, {rec});
	CHECK(out.str().find("0,random,2,inf,inf,inf,0,false,\n") != std::string::npos);

	CampaignReport report;
	report.summary.push_back({Algorithm::random, 2, metrics::kInfinity, 1.0, metrics::kInfinity, 0.0, 0.0, 0.0});
	const auto j = summary_json(report);
	CHECK(j["summary"][0]["mean_mse_index"].is_null());
	CHECK(j["summary"][0]["mean_wcev_index"] == 1.0);
}

TEST_CASE("matrix CSV parsing") {
	std::istringstream good(" 1, 0\n0 ,1\r\n\n1e0,+1.0\n");
	const Matrix m = read_matrix_csv(good);
	CHECK(m.rows() == 3);
	CHECK(m.cols() == 2);
	CHECK(m(2, 0) == 1.0);
	CHECK(m(2, 1) == 1.0);

	for (const char* bad : {"", "\n\n", "1,2\n3\n", "1,x\n", "1,,2\n", "1,2,\n", "nan,1\n", "inf,1\n", "1;2\n"}) {
		std::istringstream in(bad);
		CHECK_THROWS_AS(read_matrix_csv(in), ParseError);
	}
	CHECK_THROWS_AS(read_matrix_file("/nonexistent/matrix.csv"), ParseError);
}

TEST_CASE("place_file on the 3-row pool") {
	const auto path = temp_path("pool3.csv");
	write_file(path, "1,0\n0,1\n1,1\n");
	PlaceRequest req;
	req.matrix_path = path;
	req.rule = StoppingRule::fixed(2);
	auto j = place_file(req);
	CHECK(j["selected"] == json::array({2, 0}));
	CHECK(j["M"] == 2);
	CHECK(j["schema_version"] == kSchemaVersion);
	CHECK(j["lambda_min"].get<double>() == doctest::Approx((3 - std::sqrt(5.0)) / 2).epsilon(1e-12));

	req.local_opt = Criterion::wcev;
	j = place_file(req);
	CHECK(j["selected"] == json::array({0, 1}));
	CHECK(j["lambda_min"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));

	req.local_opt.reset();
	req.rule = StoppingRule::wcev(0.3);
	j = place_file(req);
	CHECK(j["M"] == 2);
	CHECK(j["satisfied"] == true);

	write_file(path, "1,0,3\n");
	CHECK_THROWS_AS(place_file(req), RankDeficiencyError);
	write_file(path, "1,0\n0,q\n");
	CHECK_THROWS_AS(place_file(req), ParseError);
	std::remove(path.c_str());
}

TEST_CASE("timing study contract") {
	TimingConfig c;
	c.n = 3;
	c.M = 3;
	c.sweep = {10, 20};
	c.trials = 2;
	const auto r = timing_study(c);
	CHECK(r.rows.size() == 4);
	CHECK(r.slopes.size() == 2);
	for (const auto& row : r.rows)
		CHECK(row.mean_seconds > 0.0);

	c.trials = 0;
	CHECK_THROWS_AS(timing_study(c), ConfigError);
	c.trials = 1;
	c.sweep = {2, 20};
	CHECK_THROWS_AS(timing_study(c), ConfigError);
	CHECK_THROWS_AS(timing_config_from_json(json{{"trials", 0}}), ConfigError);
	CHECK_THROWS_AS(timing_config_from_json(json{{"bogus", 1}}), ConfigError);
	CHECK(timing_config_from_json(json{{"N", {50, 100}}, {"trials", 4}}).sweep == std::vector<std::size_t>{50, 100});
}

TEST_CASE("least-squares slope") {
	CHECK(least_squares_slope({1, 2, 3, 4}, {3, 5, 7, 9}) == doctest::Approx(2.0).epsilon(1e-14));
	CHECK(least_squares_slope({0, 1, 2}, {1, 0, 2}) == doctest::Approx(0.5).epsilon(1e-14));
	const std::vector<double> logs{std::log(100.0), std::log(200.0), std::log(400.0), std::log(800.0)};
	std::vector<double> t;
	for (double x : logs)
		t.push_back(std::log(3e-6) + x);
	CHECK(least_squares_slope(logs, t) == doctest::Approx(1.0).epsilon(1e-12));
}
