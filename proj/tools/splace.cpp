// Command-line front end: single placements, oracle runs, Monte-Carlo
// campaigns and timing sweeps.

#include <splace/bench.hpp>
#include <splace/errors.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

using namespace splace;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kParse = 2, kPrecondition = 3, kConfig = 4 };

void emit(const json& doc, const std::string& out_path) {
	if (out_path.empty()) {
		std::cout << doc.dump(2) << '\n';
		return;
	}
	std::ofstream out(out_path);
	if (!out)
		throw std::runtime_error("cannot open '" + out_path + "' for writing");
	out << doc.dump(2) << '\n';
}

// A --local-opt given without a value means the WCEV criterion.
Criterion local_opt_choice(const std::string& value) {
	try {
		return parse_criterion(value.empty() ? "wcev" : value);
	} catch (const InvalidInputError& e) {
		throw ConfigError(e.what());
	}
}

Algorithm algorithm_choice(const std::string& name) {
	try {
		return parse_algorithm(name);
	} catch (const InvalidInputError& e) {
		throw ConfigError(e.what());
	}
}

// Flags shared by place and oracle; a --config file supplies the same keys and
// explicit flags win over it.
struct SingleRunArgs {
	std::string config;
	std::string matrix;
	std::string algorithm = "mpme";
	std::size_t M = 0;
	double gamma = 0.0;
	double mse_threshold = 0.0;
	std::uint64_t seed = 0;
	std::string local_opt;
	std::string objective = "lambda";
	std::string out;
};

void merge_single_config(SingleRunArgs& a, CLI::App& cmd) {
	if (a.config.empty())
		return;
	const json j = bench::read_json_file(a.config);
	if (!j.is_object())
		throw ConfigError("config must be a JSON object");
	auto set = [&](const char* key, const char* flag, auto& field) {
		if (!j.contains(key) || cmd.get_option(flag)->count() > 0)
			return;
		try {
			j.at(key).get_to(field);
		} catch (const json::exception& e) {
			throw ConfigError(std::string("config key '") + key + "': " + e.what());
		}
	};
	for (const auto& [key, value] : j.items())
		if (key != "matrix" && key != "algorithm" && key != "M" && key != "gamma" && key != "mse_threshold" &&
		    key != "seed" && key != "local_opt" && key != "objective" && key != "out")
			throw ConfigError("unknown config key '" + key + "'");
	set("matrix", "--matrix", a.matrix);
	set("algorithm", "--algorithm", a.algorithm);
	set("M", "--M", a.M);
	set("gamma", "--gamma", a.gamma);
	set("mse_threshold", "--mse-threshold", a.mse_threshold);
	set("seed", "--seed", a.seed);
	set("objective", "--objective", a.objective);
	set("out", "--out", a.out);
	if (j.contains("local_opt") && cmd.get_option("--local-opt")->count() == 0 && j.at("local_opt").is_string())
		a.local_opt = j.at("local_opt").get<std::string>();
}

StoppingRule rule_from(const SingleRunArgs& a) {
	const int given = (a.M > 0) + (a.gamma > 0.0) + (a.mse_threshold > 0.0);
	if (given != 1)
		throw ConfigError("exactly one of --M, --gamma, --mse-threshold is required");
	if (a.M > 0)
		return StoppingRule::fixed(a.M);
	if (a.gamma > 0.0)
		return StoppingRule::wcev(a.gamma);
	return StoppingRule::mse(a.mse_threshold);
}

int run_place(SingleRunArgs& a, CLI::App& cmd, const CLI::Option* local_opt) {
	merge_single_config(a, cmd);
	if (a.matrix.empty())
		throw ConfigError("--matrix is required");
	bench::PlaceRequest req;
	req.matrix_path = a.matrix;
	req.algorithm = algorithm_choice(a.algorithm);
	req.rule = rule_from(a);
	req.seed = a.seed;
	if (local_opt->count() > 0 || !a.local_opt.empty())
		req.local_opt = local_opt_choice(a.local_opt);
	emit(bench::place_file(req), a.out);
	return kOk;
}

int run_oracle(SingleRunArgs& a, CLI::App& cmd) {
	merge_single_config(a, cmd);
	if (a.matrix.empty())
		throw ConfigError("--matrix is required");
	if (a.M == 0)
		throw ConfigError("--M is required");
	OracleObjective objective;
	if (a.objective == "lambda")
		objective = OracleObjective::max_lambda_min;
	else if (a.objective == "mse")
		objective = OracleObjective::min_mse;
	else
		throw ConfigError("--objective must be lambda or mse");
	const CandidatePool pool(bench::read_matrix_file(a.matrix));
	StoppingRule::fixed(a.M).validate(pool);
	auto result = exhaustive_oracle(pool, a.M, objective);
	emit(bench::result_json(pool, result), a.out);
	return kOk;
}

struct CampaignArgs {
	std::string config;
	std::string ensemble = "gaussian";
	std::size_t N = 100;
	std::size_t n = 20;
	std::uint64_t seed = 0;
	std::size_t trials = 200;
	std::vector<std::string> algorithms{"mpme", "mnep", "framesense", "convex", "random"};
	std::size_t k_min = 20;
	std::size_t k_max = 40;
	double gamma = 0.0;
	double mse_threshold = 0.0;
	std::string local_opt;
	std::string out = "records.csv";
	std::string summary;
	unsigned workers = 0;
	bool no_runtime = false;
};

int run_campaign_cmd(const CampaignArgs& a, const CLI::Option* local_opt, const CLI::Option* out_opt,
                     const CLI::Option* summary_opt) {
	bench::BenchmarkConfig c;
	if (!a.config.empty()) {
		c = bench::config_from_json(bench::read_json_file(a.config));
		if (out_opt->count() > 0)
			c.records_path = a.out;
		if (summary_opt->count() > 0)
			c.summary_path = a.summary;
	} else {
		c.ensemble.kind = ensembles::parse_kind(a.ensemble);
		c.ensemble.N = a.N;
		c.ensemble.n = a.n;
		c.ensemble.seed = a.seed;
		c.trials = a.trials;
		for (const auto& name : a.algorithms)
			c.algorithms.push_back(algorithm_choice(name));
		c.k_min = a.k_min;
		c.k_max = a.k_max;
		if (a.gamma > 0.0)
			c.wcev_threshold = 1.0 / a.gamma;
		if (a.mse_threshold > 0.0)
			c.mse_threshold = a.mse_threshold;
		if (local_opt->count() > 0)
			c.local_opt = local_opt_choice(a.local_opt);
		c.records_path = a.out;
		c.summary_path = a.summary;
		c.workers = a.workers;
		c.record_runtime = !a.no_runtime;
	}
	if (c.summary_path.empty() && !c.records_path.empty()) {
		const auto dot = c.records_path.rfind('.');
		c.summary_path = (dot == std::string::npos ? c.records_path : c.records_path.substr(0, dot)) + ".summary.json";
	}
	const auto report = bench::run_campaign(c);
	bench::write_campaign_outputs(report);
	for (const auto& [alg, k] : report.m_from_mean_wcev)
		std::printf("%s: M from mean WCEV index = %s\n", std::string(to_string(alg)).c_str(),
		            k ? std::to_string(*k).c_str() : "none in range");
	for (const auto& [alg, k] : report.m_from_mean_mse)
		std::printf("%s: M from mean MSE index = %s\n", std::string(to_string(alg)).c_str(),
		            k ? std::to_string(*k).c_str() : "none in range");
	std::printf("wrote %zu records to %s\n", report.records.size(), c.records_path.c_str());
	return kOk;
}

struct TimingArgs {
	std::string config;
	std::size_t n = 20;
	std::size_t M = 20;
	std::vector<std::size_t> sweep{100, 200, 400, 800};
	std::vector<std::string> algorithms{"mpme", "mnep"};
	std::size_t trials = 3;
	std::uint64_t seed = 0;
	std::string out;
};

int run_timing_cmd(const TimingArgs& a, const CLI::Option* out_opt) {
	bench::TimingConfig c;
	if (!a.config.empty()) {
		c = bench::timing_config_from_json(bench::read_json_file(a.config));
		if (out_opt->count() > 0)
			c.out_path = a.out;
	} else {
		c.n = a.n;
		c.M = a.M;
		c.sweep = a.sweep;
		c.algorithms.clear();
		for (const auto& name : a.algorithms)
			c.algorithms.push_back(algorithm_choice(name));
		c.trials = a.trials;
		c.seed = a.seed;
		c.out_path = a.out;
	}
	const auto report = bench::timing_study(c);
	if (c.out_path.empty()) {
		bench::write_timing_csv(std::cout, report);
	} else {
		std::ofstream out(c.out_path);
		if (!out)
			throw std::runtime_error("cannot open '" + c.out_path + "' for writing");
		bench::write_timing_csv(out, report);
	}
	for (const auto& [alg, slope] : report.slopes)
		std::fprintf(stderr, "%s: log-log slope %.3f\n", std::string(to_string(alg)).c_str(), slope);
	return kOk;
}

} // namespace

int main(int argc, char** argv) {
	CLI::App app{"Greedy sensor placement by eigenvalue pursuit"};
	app.require_subcommand(1);

	SingleRunArgs place_args;
	auto* place = app.add_subcommand("place", "Place sensors on a candidate matrix (CSV, one row per candidate)");
	place->add_option("--config", place_args.config, "JSON file with the same keys as the flags");
	place->add_option("--matrix", place_args.matrix, "Candidate matrix CSV");
	place->add_option("--algorithm", place_args.algorithm, "mpme, mnep, framesense, convex, random or oracle");
	place->add_option("--M", place_args.M, "Fixed sensor count");
	place->add_option("--gamma", place_args.gamma, "Stop once lambda_min >= gamma");
	place->add_option("--mse-threshold", place_args.mse_threshold, "Stop once the MSE index <= threshold");
	place->add_option("--seed", place_args.seed, "Seed for the random baseline");
	auto* place_local = place->add_option("--local-opt", place_args.local_opt, "Swap refinement: wcev or mse")
	                        ->expected(0, 1);
	place->add_option("--out", place_args.out, "Output JSON path (stdout when omitted)");

	SingleRunArgs oracle_args;
	auto* oracle = app.add_subcommand("oracle", "Exhaustive search over every M-subset");
	oracle->add_option("--config", oracle_args.config, "JSON file with the same keys as the flags");
	oracle->add_option("--matrix", oracle_args.matrix, "Candidate matrix CSV");
	oracle->add_option("--M", oracle_args.M, "Sensor count");
	oracle->add_option("--objective", oracle_args.objective, "lambda (maximize lambda_min) or mse");
	oracle->add_option("--out", oracle_args.out, "Output JSON path (stdout when omitted)");

	CampaignArgs camp;
	auto* campaign = app.add_subcommand("campaign", "Monte-Carlo comparison over random pools");
	campaign->add_option("--config", camp.config, "Campaign JSON config");
	campaign->add_option("--ensemble", camp.ensemble, "gaussian, bernoulli or row_normalized_gaussian");
	campaign->add_option("--N", camp.N, "Candidates per pool");
	campaign->add_option("--n", camp.n, "Signal dimension");
	campaign->add_option("--seed", camp.seed, "Campaign seed");
	campaign->add_option("--trials", camp.trials, "Monte-Carlo trials");
	campaign->add_option("--algorithm", camp.algorithms, "Algorithms to compare")->delimiter(',');
	campaign->add_option("--k-min", camp.k_min, "Smallest sensor count");
	campaign->add_option("--k-max", camp.k_max, "Largest sensor count");
	campaign->add_option("--gamma", camp.gamma, "Required lambda_min (WCEV index threshold is 1/gamma)");
	campaign->add_option("--mse-threshold", camp.mse_threshold, "MSE index threshold");
	auto* camp_local = campaign->add_option("--local-opt", camp.local_opt, "Swap refinement: wcev or mse")
	                       ->expected(0, 1);
	auto* camp_out = campaign->add_option("--out", camp.out, "Records CSV path");
	auto* camp_summary = campaign->add_option("--summary", camp.summary, "Summary JSON path");
	campaign->add_option("--workers", camp.workers, "Worker threads (0 = hardware concurrency)");
	campaign->add_flag("--no-runtime", camp.no_runtime, "Write 0 in the runtime column");

	TimingArgs tim;
	auto* timing = app.add_subcommand("timing", "Runtime against pool size");
	timing->add_option("--config", tim.config, "Timing JSON config");
	timing->add_option("--n", tim.n, "Signal dimension");
	timing->add_option("--M", tim.M, "Sensor count");
	timing->add_option("--N", tim.sweep, "Pool sizes")->delimiter(',');
	timing->add_option("--algorithm", tim.algorithms, "Algorithms to time")->delimiter(',');
	timing->add_option("--trials", tim.trials, "Timed runs per (algorithm, N)");
	timing->add_option("--seed", tim.seed, "Seed");
	auto* tim_out = timing->add_option("--out", tim.out, "Timing CSV path (stdout when omitted)");

	try {
		app.parse(argc, argv);
	} catch (const CLI::ParseError& e) {
		const int code = app.exit(e);
		return code == 0 ? kOk : kConfig;
	}

	try {
		if (*place)
			return run_place(place_args, *place, place_local);
		if (*oracle)
			return run_oracle(oracle_args, *oracle);
		if (*campaign)
			return run_campaign_cmd(camp, camp_local, camp_out, camp_summary);
		if (*timing)
			return run_timing_cmd(tim, tim_out);
	} catch (const ParseError& e) {
		std::cerr << "parse error: " << e.what() << '\n';
		return kParse;
	} catch (const RankDeficiencyError& e) {
		std::cerr << "rank error: " << e.what() << '\n';
		return kPrecondition;
	} catch (const InvalidInputError& e) {
		std::cerr << "precondition error: " << e.what() << '\n';
		return kPrecondition;
	} catch (const ConfigError& e) {
		std::cerr << "config error: " << e.what() << '\n';
		return kConfig;
	} catch (const std::exception& e) {
		std::cerr << "error: " << e.what() << '\n';
		return kFailure;
	}
	return kFailure;
}
