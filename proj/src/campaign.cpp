#include <splace/bench.hpp>
#include <splace/errors.hpp>
#include <splace/metrics.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

namespace splace::bench {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
	return std::chrono::duration<double>(Clock::now() - start).count();
}

// Seed for the random baseline inside a trial, distinct from the pool stream.
std::uint64_t random_baseline_seed(std::uint64_t pool_seed) { return ensembles::trial_seed(pool_seed, 1); }

std::optional<StoppingRule> primary_rule(const BenchmarkConfig& c) {
	if (c.wcev_threshold)
		return StoppingRule::wcev(1.0 / *c.wcev_threshold);
	if (c.mse_threshold)
		return StoppingRule::mse(*c.mse_threshold);
	return std::nullopt;
}

bool meets(const StoppingRule& rule, const CandidatePool& pool, std::span<const std::size_t> sel) {
	return rule.threshold_met(linalg::sym_eigenvalues(gram_of_rows(pool.matrix(), sel)));
}

// First prefix length >= n of `order` that meets the rule.
std::optional<std::size_t> first_satisfying_prefix(const CandidatePool& pool, const std::vector<std::size_t>& order,
                                                   const StoppingRule& rule) {
	for (std::size_t k = pool.dim(); k <= order.size(); ++k)
		if (meets(rule, pool, std::span(order).first(k)))
			return k;
	return std::nullopt;
}

std::vector<Algorithm> sorted_by_name(std::vector<Algorithm> algs) {
	std::sort(algs.begin(), algs.end(), [](Algorithm a, Algorithm b) { return to_string(a) < to_string(b); });
	return algs;
}

struct TrialOutput {
	std::vector<TrialRecord> records;
	unsigned attempts = 0;
};

TrialOutput run_trial(const BenchmarkConfig& c, const std::vector<Algorithm>& algorithms, std::size_t trial) {
	ensembles::EnsembleSpec spec = c.ensemble;
	spec.seed = ensembles::trial_seed(c.ensemble.seed, trial);
	const auto generated = ensembles::generate(spec);
	const CandidatePool& pool = generated.pool;
	const auto rule = primary_rule(c);
	const std::uint64_t rseed = random_baseline_seed(generated.seed_used);

	TrialOutput out;
	out.attempts = generated.attempts;

	for (Algorithm alg : algorithms) {
		std::vector<std::vector<std::size_t>> selections(c.k_max + 1);
		std::vector<double> runtimes(c.k_max + 1, 0.0);
		std::optional<PlacementResult> greedy;

		if (alg == Algorithm::mpme || alg == Algorithm::mnep) {
			const auto r = alg == Algorithm::mpme ? run_mpme(pool, StoppingRule::fixed(c.k_max))
			                                      : run_mnep(pool, StoppingRule::fixed(c.k_max));
			for (std::size_t k = c.k_min; k <= c.k_max; ++k) {
				selections[k].assign(r.selected.begin(), r.selected.begin() + static_cast<std::ptrdiff_t>(k));
				runtimes[k] = r.step_seconds[k - 1];
			}
			greedy = r;
		} else {
			for (std::size_t k = c.k_min; k <= c.k_max; ++k) {
				const auto start = Clock::now();
				selections[k] = run_fixed(pool, alg, k, rseed).selected;
				runtimes[k] = seconds_since(start);
			}
		}

		if (c.local_opt) {
			for (std::size_t k = c.k_min; k <= c.k_max; ++k) {
				PlacementResult base;
				base.algorithm = alg;
				base.selected = selections[k];
				const auto start = Clock::now();
				selections[k] = local_optimize(pool, base, *c.local_opt).selected;
				runtimes[k] += seconds_since(start);
			}
		}

		std::vector<TrialRecord> recs;
		for (std::size_t k = c.k_min; k <= c.k_max; ++k) {
			const auto report = metrics::evaluate(pool.matrix(), selections[k]);
			TrialRecord rec;
			rec.trial = trial;
			rec.algorithm = alg;
			rec.k = k;
			rec.mse_index = report.mse_index;
			rec.wcev_index = report.wcev_index;
			rec.condition_number = report.condition_number;
			rec.runtime_seconds = c.record_runtime ? runtimes[k] : 0.0;
			rec.satisfied = (!c.wcev_threshold || rec.wcev_index <= *c.wcev_threshold) &&
			                (!c.mse_threshold || rec.mse_index <= *c.mse_threshold);
			recs.push_back(rec);
		}

		std::optional<std::size_t> required;
		if (rule && c.local_opt) {
			// Locally optimized selections exist only inside the sensor range.
			for (const auto& rec : recs) {
				const double index = c.wcev_threshold ? rec.wcev_index : rec.mse_index;
				const double limit = c.wcev_threshold ? *c.wcev_threshold : *c.mse_threshold;
				if (index <= limit) {
					required = rec.k;
					break;
				}
			}
		} else if (rule) {
			switch (alg) {
			case Algorithm::mpme:
			case Algorithm::mnep: {
				// The fixed-count run is a prefix of the threshold run.
				required = first_satisfying_prefix(pool, greedy->selected, *rule);
				if (!required && c.k_max < pool.size()) {
					const auto r = alg == Algorithm::mpme ? run_mpme(pool, *rule) : run_mnep(pool, *rule);
					if (r.satisfied)
						required = r.M();
				}
				break;
			}
			case Algorithm::framesense: {
				const auto r = run_framesense_threshold(pool, *rule);
				if (r.satisfied)
					required = r.M();
				break;
			}
			case Algorithm::convex: {
				for (std::size_t m = pool.dim(); m <= pool.size() && !required; ++m) {
					const bool cached = m >= c.k_min && m <= c.k_max;
					const auto sel = cached ? selections[m] : run_convex_relaxation(pool, m).placement.selected;
					if (meets(*rule, pool, sel))
						required = m;
				}
				break;
			}
			case Algorithm::random:
				required = first_satisfying_prefix(pool, run_random(pool, pool.size(), rseed).selected, *rule);
				break;
			case Algorithm::oracle: break;
			}
		}
		for (auto& rec : recs)
			rec.M_required = required;
		out.records.insert(out.records.end(), recs.begin(), recs.end());
	}
	return out;
}

std::optional<std::size_t> first_k_at_or_below(const std::vector<SummaryRow>& rows, Algorithm alg, double limit,
                                               double SummaryRow::*field) {
	for (const auto& row : rows)
		if (row.algorithm == alg && row.*field <= limit)
			return row.k;
	return std::nullopt;
}

} // namespace

void BenchmarkConfig::validate() const {
	if (ensemble.n == 0 || ensemble.N < ensemble.n)
		throw ConfigError("ensemble needs N >= n >= 1");
	if (trials == 0)
		throw ConfigError("trials must be at least 1");
	if (algorithms.empty())
		throw ConfigError("at least one algorithm is required");
	std::set<Algorithm> seen;
	for (Algorithm a : algorithms) {
		if (a == Algorithm::oracle)
			throw ConfigError("the exhaustive oracle is not a campaign algorithm");
		if (!seen.insert(a).second)
			throw ConfigError("algorithm listed twice: " + std::string(to_string(a)));
	}
	if (k_min < ensemble.n || k_max < k_min || k_max > ensemble.N)
		throw ConfigError("sensor range must satisfy n <= k_min <= k_max <= N");
	for (const auto& t : {wcev_threshold, mse_threshold})
		if (t && !(*t > 0.0 && std::isfinite(*t)))
			throw ConfigError("thresholds must be positive and finite");
}

PlacementResult run_fixed(const CandidatePool& pool, Algorithm algorithm, std::size_t m, std::uint64_t seed) {
	switch (algorithm) {
	case Algorithm::mpme: return run_mpme(pool, StoppingRule::fixed(m));
	case Algorithm::mnep: return run_mnep(pool, StoppingRule::fixed(m));
	case Algorithm::framesense: return run_framesense(pool, m);
	case Algorithm::convex: return run_convex_relaxation(pool, m).placement;
	case Algorithm::random: return run_random(pool, m, seed);
	case Algorithm::oracle: return exhaustive_oracle(pool, m, OracleObjective::max_lambda_min);
	}
	throw InvalidInputError("run_fixed: unknown algorithm");
}

CampaignReport run_campaign(const BenchmarkConfig& config) {
	config.validate();
	const auto algorithms = sorted_by_name(config.algorithms);

	std::vector<TrialOutput> outputs(config.trials);
	unsigned workers = config.workers != 0 ? config.workers : std::max(1u, std::thread::hardware_concurrency());
	workers = static_cast<unsigned>(std::min<std::size_t>(workers, config.trials));

	std::atomic<std::size_t> next{0};
	std::exception_ptr failure;
	std::mutex failure_mutex;
	auto work = [&] {
		for (;;) {
			const std::size_t t = next.fetch_add(1);
			if (t >= config.trials)
				return;
			try {
				outputs[t] = run_trial(config, algorithms, t);
			} catch (...) {
				std::lock_guard lock(failure_mutex);
				if (!failure)
					failure = std::current_exception();
				next = config.trials;
				return;
			}
		}
	};
	if (workers <= 1) {
		work();
	} else {
		std::vector<std::jthread> pool;
		for (unsigned w = 0; w < workers; ++w)
			pool.emplace_back(work);
	}
	if (failure)
		std::rethrow_exception(failure);

	CampaignReport report;
	report.config = config;
	for (std::size_t t = 0; t < config.trials; ++t) {
		if (outputs[t].attempts > 0)
			report.regenerated_trials[t] = outputs[t].attempts;
		report.records.insert(report.records.end(), outputs[t].records.begin(), outputs[t].records.end());
	}

	const double inv_trials = 1.0 / static_cast<double>(config.trials);
	for (Algorithm alg : algorithms) {
		for (std::size_t k = config.k_min; k <= config.k_max; ++k) {
			SummaryRow row;
			row.algorithm = alg;
			row.k = k;
			std::size_t finite = 0;
			std::size_t satisfied = 0;
			for (const auto& rec : report.records) {
				if (rec.algorithm != alg || rec.k != k)
					continue;
				row.mean_mse_index += rec.mse_index * inv_trials;
				row.mean_wcev_index += rec.wcev_index * inv_trials;
				row.mean_condition_number += rec.condition_number * inv_trials;
				row.mean_runtime_seconds += rec.runtime_seconds * inv_trials;
				satisfied += rec.satisfied ? 1 : 0;
				finite += std::isfinite(rec.condition_number) ? 1 : 0;
			}
			row.finite_condition_fraction = static_cast<double>(finite) / static_cast<double>(config.trials);
			row.satisfied_fraction = static_cast<double>(satisfied) / static_cast<double>(config.trials);
			report.summary.push_back(row);
		}
		if (config.wcev_threshold)
			report.m_from_mean_wcev[alg] =
				first_k_at_or_below(report.summary, alg, *config.wcev_threshold, &SummaryRow::mean_wcev_index);
		if (config.mse_threshold)
			report.m_from_mean_mse[alg] =
				first_k_at_or_below(report.summary, alg, *config.mse_threshold, &SummaryRow::mean_mse_index);
	}
	return report;
}

nlohmann::json result_json(const CandidatePool& pool, const PlacementResult& result) {
	const auto report = metrics::evaluate(pool.matrix(), result.selected);
	nlohmann::json j;
	j["schema_version"] = kSchemaVersion;
	j["algorithm"] = std::string(to_string(result.algorithm));
	j["selected"] = result.selected;
	j["M"] = result.M();
	j["lambda_min"] = report.lambda_min;
	j["wcev_index"] = report.wcev_index;
	j["mse_index"] = report.mse_index;
	j["condition_number"] = report.condition_number;
	j["satisfied"] = result.satisfied;
	j["lambda_trace"] = result.lambda_trace;
	j["local_passes"] = result.local_passes;
	j["local_pass_cap_hit"] = result.local_pass_cap_hit;
	return j;
}

nlohmann::json place_file(const PlaceRequest& request) {
	const CandidatePool pool(read_matrix_file(request.matrix_path));
	const StoppingRule& rule = request.rule;
	rule.validate(pool);

	PlacementResult result;
	if (rule.kind == StoppingRule::Kind::fixed_count) {
		result = run_fixed(pool, request.algorithm, rule.count(), request.seed);
	} else {
		switch (request.algorithm) {
		case Algorithm::mpme: result = run_mpme(pool, rule); break;
		case Algorithm::mnep: result = run_mnep(pool, rule); break;
		case Algorithm::framesense: result = run_framesense_threshold(pool, rule); break;
		case Algorithm::convex: result = run_convex_threshold(pool, rule); break;
		case Algorithm::random: {
			result = run_random(pool, pool.size(), request.seed);
			const auto m = first_satisfying_prefix(pool, result.selected, rule);
			result.satisfied = m.has_value();
			if (m)
				result.selected.resize(*m);
			result.lambda_trace.assign(1, linalg::sym_eigenvalues(gram_of_rows(pool.matrix(), result.selected)).back());
			break;
		}
		case Algorithm::oracle:
			throw ConfigError("the exhaustive oracle needs a fixed sensor count");
		}
	}
	if (request.local_opt)
		result = local_optimize(pool, result, *request.local_opt);
	return result_json(pool, result);
}

void TimingConfig::validate() const {
	if (trials == 0)
		throw ConfigError("timing study needs at least one trial");
	if (n == 0 || M < n)
		throw ConfigError("timing study needs M >= n >= 1");
	if (sweep.size() < 2)
		throw ConfigError("timing sweep needs at least two values of N");
	for (std::size_t big_n : sweep)
		if (big_n < M)
			throw ConfigError("every N in the timing sweep must be at least M");
	if (algorithms.empty())
		throw ConfigError("timing study needs at least one algorithm");
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
	const double count = static_cast<double>(x.size());
	double mx = 0.0, my = 0.0;
	for (std::size_t i = 0; i < x.size(); ++i) {
		mx += x[i] / count;
		my += y[i] / count;
	}
	double sxy = 0.0, sxx = 0.0;
	for (std::size_t i = 0; i < x.size(); ++i) {
		sxy += (x[i] - mx) * (y[i] - my);
		sxx += (x[i] - mx) * (x[i] - mx);
	}
	return sxy / sxx;
}

TimingReport timing_study(const TimingConfig& config) {
	config.validate();
	const std::size_t sizes = config.sweep.size();
	std::vector<std::uint64_t> sweep_seeds(sizes);
	std::vector<std::vector<CandidatePool>> pools(sizes);
	for (std::size_t s = 0; s < sizes; ++s) {
		sweep_seeds[s] = ensembles::trial_seed(config.seed, config.sweep[s]);
		for (std::size_t t = 0; t < config.trials; ++t) {
			ensembles::EnsembleSpec spec{ensembles::EnsembleKind::gaussian, config.sweep[s], config.n,
			                             ensembles::trial_seed(sweep_seeds[s], t)};
			pools[s].push_back(ensembles::generate(spec).pool);
		}
	}

	TimingReport report;
	for (Algorithm alg : config.algorithms) {
		std::vector<double> totals(sizes, 0.0);
		for (std::size_t s = 0; s < sizes; ++s)
			run_fixed(pools[s].front(), alg, config.M, sweep_seeds[s]); // warm-up, not timed
		// Sizes are interleaved within each trial so slow drift in machine load
		// spreads over the whole sweep instead of biasing one N.
		for (std::size_t t = 0; t < config.trials; ++t) {
			for (std::size_t s = 0; s < sizes; ++s) {
				const auto start = Clock::now();
				run_fixed(pools[s][t], alg, config.M, sweep_seeds[s]);
				totals[s] += seconds_since(start);
			}
		}
		std::vector<double> log_n, log_t;
		for (std::size_t s = 0; s < sizes; ++s) {
			const double mean = totals[s] / static_cast<double>(config.trials);
			report.rows.push_back({alg, config.sweep[s], mean});
			log_n.push_back(std::log(static_cast<double>(config.sweep[s])));
			log_t.push_back(std::log(mean));
		}
		report.slopes[alg] = least_squares_slope(log_n, log_t);
	}
	return report;
}

} // namespace splace::bench
