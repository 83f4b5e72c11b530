#include <splace/bench.hpp>
#include <splace/errors.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace splace::bench {

using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
	const auto first = s.find_first_not_of(" \t\r");
	if (first == std::string_view::npos)
		return {};
	const auto last = s.find_last_not_of(" \t\r");
	return s.substr(first, last - first + 1);
}

double parse_real(std::string_view field, std::size_t line) {
	field = trim(field);
	if (!field.empty() && field.front() == '+')
		field.remove_prefix(1);
	double value = 0.0;
	const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
	if (field.empty() || ec != std::errc() || ptr != field.data() + field.size())
		throw ParseError("line " + std::to_string(line) + ": '" + std::string(field) + "' is not a number");
	if (!std::isfinite(value))
		throw ParseError("line " + std::to_string(line) + ": non-finite value");
	return value;
}

std::string format_double(double v) {
	char buf[32];
	std::snprintf(buf, sizeof buf, "%.17g", v);
	return buf;
}

// JSON has no infinity; singular indices become null.
json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::ofstream open_output(const std::string& path) {
	std::ofstream out(path, std::ios::binary);
	if (!out)
		throw std::runtime_error("cannot open '" + path + "' for writing");
	return out;
}

void check_keys(const json& j, const char* where, std::initializer_list<const char*> allowed) {
	if (!j.is_object())
		throw ConfigError(std::string(where) + " must be a JSON object");
	for (const auto& [key, value] : j.items()) {
		bool known = false;
		for (const char* a : allowed)
			known = known || key == a;
		if (!known)
			throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
	}
}

template <class T>
T get_as(const json& j, const char* key) {
	try {
		return j.at(key).get<T>();
	} catch (const json::exception& e) {
		throw ConfigError(std::string("config key '") + key + "': " + e.what());
	}
}

bool is_count(const json& v) { return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0); }

const json& require(const json& j, const char* key) {
	if (!j.contains(key))
		throw ConfigError(std::string("missing config key '") + key + "'");
	return j.at(key);
}

std::size_t get_count(const json& j, const char* key) {
	const json& v = require(j, key);
	if (!is_count(v))
		throw ConfigError(std::string("config key '") + key + "' must be a nonnegative integer");
	return v.get<std::size_t>();
}

Algorithm algorithm_from(const json& v) {
	if (!v.is_string())
		throw ConfigError("algorithm names must be strings");
	try {
		return parse_algorithm(v.get<std::string>());
	} catch (const InvalidInputError& e) {
		throw ConfigError(e.what());
	}
}

std::vector<Algorithm> algorithms_from(const json& v) {
	if (!v.is_array())
		throw ConfigError("'algorithms' must be an array");
	std::vector<Algorithm> out;
	for (const auto& a : v)
		out.push_back(algorithm_from(a));
	return out;
}

json algorithm_names(const std::vector<Algorithm>& algs) {
	json out = json::array();
	for (Algorithm a : algs)
		out.push_back(std::string(to_string(a)));
	return out;
}

} // namespace

Matrix read_matrix_csv(std::istream& in) {
	std::vector<std::vector<double>> rows;
	std::string line;
	std::size_t number = 0;
	while (std::getline(in, line)) {
		++number;
		const auto body = trim(line);
		if (body.empty())
			continue;
		std::vector<double> row;
		std::size_t pos = 0;
		for (;;) {
			const auto comma = body.find(',', pos);
			row.push_back(parse_real(body.substr(pos, comma - pos), number));
			if (comma == std::string_view::npos)
				break;
			pos = comma + 1;
		}
		if (!rows.empty() && row.size() != rows.front().size())
			throw ParseError("line " + std::to_string(number) + ": expected " + std::to_string(rows.front().size()) +
			                 " values, found " + std::to_string(row.size()));
		rows.push_back(std::move(row));
	}
	if (rows.empty())
		throw ParseError("matrix file has no rows");
	return Matrix::from_rows(rows);
}

Matrix read_matrix_file(const std::string& path) {
	std::ifstream in(path);
	if (!in)
		throw ParseError("cannot read matrix file '" + path + "'");
	return read_matrix_csv(in);
}

json read_json_file(const std::string& path) {
	std::ifstream in(path);
	if (!in)
		throw ConfigError("cannot read config file '" + path + "'");
	try {
		return json::parse(in);
	} catch (const json::parse_error& e) {
		throw ConfigError("'" + path + "': " + e.what());
	}
}

BenchmarkConfig config_from_json(const json& j) {
	check_keys(j, "campaign config",
	           {"ensemble", "trials", "algorithms", "sensor_range", "local_opt", "thresholds", "output",
	            "record_runtime", "workers"});
	BenchmarkConfig c;
	const json& e = require(j, "ensemble");
	check_keys(e, "ensemble", {"kind", "N", "n", "seed"});
	c.ensemble.kind = ensembles::parse_kind(get_as<std::string>(e, "kind"));
	c.ensemble.N = get_count(e, "N");
	c.ensemble.n = get_count(e, "n");
	if (e.contains("seed"))
		c.ensemble.seed = get_as<std::uint64_t>(e, "seed");
	c.trials = get_count(j, "trials");
	c.algorithms = algorithms_from(require(j, "algorithms"));

	const json& range = require(j, "sensor_range");
	if (!range.is_array() || range.size() != 2 || !is_count(range[0]) || !is_count(range[1]))
		throw ConfigError("'sensor_range' must be [k_min, k_max]");
	c.k_min = range[0].get<std::size_t>();
	c.k_max = range[1].get<std::size_t>();

	if (j.contains("local_opt") && !j.at("local_opt").is_null()) {
		try {
			c.local_opt = parse_criterion(get_as<std::string>(j, "local_opt"));
		} catch (const InvalidInputError& err) {
			throw ConfigError(err.what());
		}
	}
	if (j.contains("thresholds")) {
		const json& t = j.at("thresholds");
		check_keys(t, "thresholds", {"wcev_index", "mse_index"});
		if (t.contains("wcev_index") && !t.at("wcev_index").is_null())
			c.wcev_threshold = get_as<double>(t, "wcev_index");
		if (t.contains("mse_index") && !t.at("mse_index").is_null())
			c.mse_threshold = get_as<double>(t, "mse_index");
	}
	if (j.contains("output")) {
		const json& o = j.at("output");
		check_keys(o, "output", {"records", "summary"});
		if (o.contains("records"))
			c.records_path = get_as<std::string>(o, "records");
		if (o.contains("summary"))
			c.summary_path = get_as<std::string>(o, "summary");
	}
	if (j.contains("record_runtime"))
		c.record_runtime = get_as<bool>(j, "record_runtime");
	if (j.contains("workers"))
		c.workers = static_cast<unsigned>(get_count(j, "workers"));
	c.validate();
	return c;
}

json to_json(const BenchmarkConfig& c) {
	json j;
	j["ensemble"] = {{"kind", std::string(ensembles::to_string(c.ensemble.kind))},
	                 {"N", c.ensemble.N},
	                 {"n", c.ensemble.n},
	                 {"seed", c.ensemble.seed}};
	j["trials"] = c.trials;
	j["algorithms"] = algorithm_names(c.algorithms);
	j["sensor_range"] = {c.k_min, c.k_max};
	j["local_opt"] = c.local_opt ? json(std::string(to_string(*c.local_opt))) : json(nullptr);
	j["thresholds"] = {{"wcev_index", c.wcev_threshold ? json(*c.wcev_threshold) : json(nullptr)},
	                   {"mse_index", c.mse_threshold ? json(*c.mse_threshold) : json(nullptr)}};
	j["output"] = {{"records", c.records_path}, {"summary", c.summary_path}};
	j["record_runtime"] = c.record_runtime;
	j["workers"] = c.workers;
	return j;
}

void write_records_csv(std::ostream& out, const std::vector<TrialRecord>& records) {
	out << kRecordColumns << '\n';
	for (const auto& r : records) {
		out << r.trial << ',' << to_string(r.algorithm) << ',' << r.k << ',' << format_double(r.mse_index) << ','
		    << format_double(r.wcev_index) << ',' << format_double(r.condition_number) << ','
		    << format_double(r.runtime_seconds) << ',' << (r.satisfied ? "true" : "false") << ',';
		if (r.M_required)
			out << *r.M_required;
		out << '\n';
	}
}

json summary_json(const CampaignReport& report) {
	json j;
	j["schema_version"] = kSchemaVersion;
	j["config"] = to_json(report.config);
	json rows = json::array();
	for (const auto& s : report.summary)
		rows.push_back({{"algorithm", std::string(to_string(s.algorithm))},
		                {"k", s.k},
		                {"mean_mse_index", finite_or_null(s.mean_mse_index)},
		                {"mean_wcev_index", finite_or_null(s.mean_wcev_index)},
		                {"mean_condition_number", finite_or_null(s.mean_condition_number)},
		                {"finite_condition_fraction", s.finite_condition_fraction},
		                {"mean_runtime_seconds", s.mean_runtime_seconds},
		                {"satisfied_fraction", s.satisfied_fraction}});
	j["summary"] = rows;
	auto first_k = [](const std::map<Algorithm, std::optional<std::size_t>>& m) {
		json o = json::object();
		for (const auto& [alg, k] : m)
			o[std::string(to_string(alg))] = k ? json(*k) : json(nullptr);
		return o;
	};
	j["M_from_mean_wcev"] = first_k(report.m_from_mean_wcev);
	j["M_from_mean_mse"] = first_k(report.m_from_mean_mse);
	json regen = json::object();
	for (const auto& [trial, attempts] : report.regenerated_trials)
		regen[std::to_string(trial)] = attempts;
	j["regenerated_trials"] = regen;
	return j;
}

void write_campaign_outputs(const CampaignReport& report) {
	if (!report.config.records_path.empty()) {
		auto out = open_output(report.config.records_path);
		write_records_csv(out, report.records);
	}
	if (!report.config.summary_path.empty()) {
		auto out = open_output(report.config.summary_path);
		out << summary_json(report).dump(2) << '\n';
	}
}

TimingConfig timing_config_from_json(const json& j) {
	check_keys(j, "timing config", {"n", "M", "N", "algorithms", "trials", "seed", "output"});
	TimingConfig c;
	if (j.contains("n"))
		c.n = get_count(j, "n");
	if (j.contains("M"))
		c.M = get_count(j, "M");
	if (j.contains("N")) {
		const json& sweep = j.at("N");
		if (!sweep.is_array())
			throw ConfigError("'N' must be an array of pool sizes");
		c.sweep.clear();
		for (const auto& v : sweep) {
			if (!is_count(v))
				throw ConfigError("'N' entries must be positive integers");
			c.sweep.push_back(v.get<std::size_t>());
		}
	}
	if (j.contains("algorithms"))
		c.algorithms = algorithms_from(require(j, "algorithms"));
	if (j.contains("trials"))
		c.trials = get_count(j, "trials");
	if (j.contains("seed"))
		c.seed = get_as<std::uint64_t>(j, "seed");
	if (j.contains("output"))
		c.out_path = get_as<std::string>(j, "output");
	c.validate();
	return c;
}

void write_timing_csv(std::ostream& out, const TimingReport& report) {
	out << "algorithm,N,mean_seconds\n";
	for (const auto& r : report.rows)
		out << to_string(r.algorithm) << ',' << r.N << ',' << format_double(r.mean_seconds) << '\n';
}

json timing_json(const TimingReport& report) {
	json j;
	j["schema_version"] = kSchemaVersion;
	json rows = json::array();
	for (const auto& r : report.rows)
		rows.push_back({{"algorithm", std::string(to_string(r.algorithm))}, {"N", r.N}, {"mean_seconds", r.mean_seconds}});
	j["rows"] = rows;
	json slopes = json::object();
	for (const auto& [alg, s] : report.slopes)
		slopes[std::string(to_string(alg))] = s;
	j["slopes"] = slopes;
	return j;
}

} // namespace splace::bench
