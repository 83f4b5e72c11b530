#include "support.hpp"

#include <splace/errors.hpp>
#include <splace/linalg.hpp>
#include <splace/metrics.hpp>
#include <splace/placement.hpp>

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

using namespace splace;
using testing_support::random_matrix;
using testing_support::three_row_pool;

namespace {

const double kGoldenLambda = (3 - std::sqrt(5.0)) / 2;

std::set<std::size_t> as_set(const std::vector<std::size_t>& v) { return {v.begin(), v.end()}; }

double lambda_min_of(const CandidatePool& pool, std::span<const std::size_t> sel) {
	return linalg::sym_eigenvalues(gram_of_rows(pool.matrix(), sel)).back();
}

CandidatePool gaussian_pool(std::size_t big_n, std::size_t n, std::mt19937_64& gen) {
	return CandidatePool(random_matrix(big_n, n, gen));
}

// Every single swap, evaluated from scratch.
bool admits_improving_swap(const CandidatePool& pool, const std::vector<std::size_t>& sel, Criterion c) {
	const double base = criterion_value(pool, sel, c);
	std::vector<bool> taken(pool.size(), false);
	for (std::size_t i : sel)
		taken[i] = true;
	for (std::size_t p = 0; p < sel.size(); ++p) {
		for (std::size_t j = 0; j < pool.size(); ++j) {
			if (taken[j])
				continue;
			auto trial = sel;
			trial[p] = j;
			if (strictly_improves(criterion_value(pool, trial, c), base, 1e-12))
				return true;
		}
	}
	return false;
}

} // namespace

TEST_CASE("pool construction contract") {
	CHECK_THROWS_AS(CandidatePool{Matrix(0, 0)}, InvalidInputError);
	CHECK_THROWS_AS(CandidatePool{Matrix::from_rows({{1, 2, 3}})}, RankDeficiencyError);
	CHECK_THROWS_AS(CandidatePool{Matrix::from_rows({{1, 2}, {2, 4}, {3, 6}})}, RankDeficiencyError);
	Matrix bad = Matrix::identity(2);
	bad(0, 1) = std::nan("");
	CHECK_THROWS_AS(CandidatePool{bad}, InvalidInputError);
}

TEST_CASE("initial state") {
	std::mt19937_64 gen(31);
	const auto pool = gaussian_pool(100, 20, gen);
	const auto state = init_state(pool);
	CHECK(state.k() == 0);
	CHECK(state.projector().matrix == Matrix::identity(20));
	CHECK(state.projector().subspace_dim == 20);
	CHECK(state.dual().max_abs() == 0.0);
	const auto small = three_row_pool();
	CHECK(init_state(small).projector().matrix == Matrix::identity(2));
}

TEST_CASE("projection scores on the three-row pool") {
	const auto pool = three_row_pool();
	auto state = init_state(pool);
	CHECK(projection_score(state, 2) == doctest::Approx(2.0).epsilon(1e-15));

	auto after_r3 = extend_state(state, 2);
	CHECK(projection_score(after_r3, 0) == doctest::Approx(0.5).epsilon(1e-15));
	CHECK_THROWS_AS(projection_score(after_r3, 2), InvalidInputError);

	auto after_r1_r2 = extend_state(extend_state(state, 0), 1);
	CHECK(after_r1_r2.multiplicity() == 2);
	CHECK(projection_score(after_r1_r2, 2) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("extending the state") {
	const auto pool = three_row_pool();
	auto s1 = extend_state(init_state(pool), 2);
	CHECK(s1.dual() == Matrix::from_rows({{1, 1}, {1, 1}}));
	CHECK(max_abs_diff(s1.projector().matrix, Matrix::from_rows({{0.5, -0.5}, {-0.5, 0.5}})) <= 1e-15);
	CHECK(s1.projector().subspace_dim == 1);

	auto s2 = extend_state(s1, 0);
	CHECK(s2.dual() == Matrix::from_rows({{2, 1}, {1, 1}}));
	CHECK(s2.lambda_min() == doctest::Approx(kGoldenLambda).epsilon(1e-14));
	CHECK_THROWS_AS(extend_state(s2, 0), InvalidInputError);
	CHECK_THROWS_AS(extend_state(s2, 7), InvalidInputError);
}

TEST_CASE("selection state keeps the dual matrix and null-space dimension") {
	std::mt19937_64 gen(32);
	const auto pool = gaussian_pool(40, 8, gen);
	SelectionState state(pool);
	for (std::size_t i = 0; i < 15; ++i) {
		state.extend(i * 2);
		const Matrix ref = gram_of_rows(pool.matrix(), state.selected());
		CHECK(max_abs_diff(state.dual(), ref) <= 1e-9 * std::max(1.0, ref.max_abs()));
		if (state.k() < 8)
			CHECK(state.projector().subspace_dim == 8 - state.k());
	}
}

TEST_CASE("MPME on the three-row pool") {
	const auto pool = three_row_pool();
	const auto fixed = run_mpme(pool, StoppingRule::fixed(2));
	CHECK(fixed.selected == std::vector<std::size_t>{2, 0});
	CHECK(fixed.M() == 2);
	REQUIRE(fixed.lambda_trace.size() == 1);
	CHECK(fixed.lambda_trace.back() == doctest::Approx(kGoldenLambda).epsilon(1e-14));
	CHECK(fixed.satisfied);

	const auto wcev = run_mpme(pool, StoppingRule::wcev(0.3));
	CHECK(wcev.M() == 2);
	CHECK(wcev.satisfied);

	const auto impossible = run_mpme(pool, StoppingRule::wcev(100.0));
	CHECK(impossible.M() == 3);
	CHECK_FALSE(impossible.satisfied);

	CHECK_THROWS_AS(run_mpme(pool, StoppingRule::fixed(1)), InvalidInputError);
	CHECK_THROWS_AS(run_mpme(pool, StoppingRule::fixed(4)), InvalidInputError);
	CHECK_THROWS_AS(run_mpme(pool, StoppingRule::wcev(-1.0)), InvalidInputError);
}

TEST_CASE("MNEP on small pools") {
	const auto pool = three_row_pool();
	const auto r = run_mnep(pool, StoppingRule::fixed(2));
	CHECK(r.selected == std::vector<std::size_t>{2, 0});
	CHECK(r.lambda_trace.back() == doctest::Approx(kGoldenLambda).epsilon(1e-14));

	const CandidatePool ortho(Matrix::identity(2));
	const auto o = run_mnep(ortho, StoppingRule::fixed(2));
	CHECK(as_set(o.selected) == std::set<std::size_t>{0, 1});
	CHECK(o.lambda_trace.back() == doctest::Approx(1.0));
}

TEST_CASE("greedy traces are nondecreasing and Psi_n is nonsingular") {
	std::mt19937_64 gen(33);
	for (int rep = 0; rep < 10; ++rep) {
		const auto pool = gaussian_pool(60, 8, gen);
		for (const auto& r : {run_mpme(pool, StoppingRule::fixed(30)), run_mnep(pool, StoppingRule::fixed(30))}) {
			CHECK(r.lambda_trace.size() == 30 - 8 + 1);
			CHECK(r.lambda_trace.front() > 0.0);
			for (std::size_t i = 1; i < r.lambda_trace.size(); ++i)
				CHECK(r.lambda_trace[i] >= r.lambda_trace[i - 1] - 1e-12);
			CHECK(as_set(r.selected).size() == 30);
		}
	}
}

TEST_CASE("threshold rules stop at the first satisfying k") {
	std::mt19937_64 gen(34);
	const auto pool = gaussian_pool(100, 10, gen);
	const auto full = run_mpme(pool, StoppingRule::fixed(100));
	const auto stopped = run_mpme(pool, StoppingRule::wcev(5.0));
	REQUIRE(stopped.satisfied);
	const std::size_t idx = stopped.M() - 10;
	CHECK(full.lambda_trace[idx] >= 5.0);
	if (idx > 0)
		CHECK(full.lambda_trace[idx - 1] < 5.0);

	const auto by_mse = run_mnep(pool, StoppingRule::mse(2.0));
	REQUIRE(by_mse.satisfied);
	std::vector<std::size_t> prefix(by_mse.selected.begin(), by_mse.selected.end() - 1);
	CHECK(metrics::mse_index(gram_of_rows(pool.matrix(), by_mse.selected)) <= 2.0);
	if (prefix.size() >= 10)
		CHECK(metrics::mse_index(gram_of_rows(pool.matrix(), prefix)) > 2.0);
}

TEST_CASE("each MPME step with a simple minimum follows the secular equation") {
	std::mt19937_64 gen(35);
	for (int rep = 0; rep < 10; ++rep) {
		const auto pool = gaussian_pool(30, 6, gen);
		const auto run = run_mpme(pool, StoppingRule::fixed(30));
		SelectionState state(pool);
		for (std::size_t step = 0; step < run.selected.size(); ++step) {
			const std::size_t next = run.selected[step];
			if (state.k() >= 6 && state.multiplicity() == 1) {
				const auto& eig = state.eigensystem();
				std::vector<double> z(6);
				for (std::size_t i = 0; i < 6; ++i)
					z[i] = dot(eig.vector(i), pool.row(next));
				const double predicted = linalg::secular_min_eigenvalue(eig.values, z, 1);
				state.extend(next);
				CHECK(std::abs(predicted - state.lambda_min()) <= 1e-8);
			} else {
				state.extend(next);
			}
		}
	}
}

TEST_CASE("MPME order is invariant to scaling and follows row permutations") {
	std::mt19937_64 gen(36);
	const Matrix base = random_matrix(50, 7, gen);
	const auto ref = run_mpme(CandidatePool(base), StoppingRule::fixed(25));

	Matrix scaled = base;
	for (double& x : scaled.data())
		x *= 3.7;
	const auto scaled_run = run_mpme(CandidatePool(scaled), StoppingRule::fixed(25));
	CHECK(scaled_run.selected == ref.selected);
	for (std::size_t i = 0; i < ref.score_trace.size(); ++i)
		CHECK(scaled_run.score_trace[i] == doctest::Approx(ref.score_trace[i] * 3.7 * 3.7).epsilon(1e-9));

	std::vector<std::size_t> perm(50);
	std::iota(perm.begin(), perm.end(), std::size_t{0});
	std::shuffle(perm.begin(), perm.end(), gen);
	Matrix permuted(50, 7);
	for (std::size_t i = 0; i < 50; ++i)
		for (std::size_t j = 0; j < 7; ++j)
			permuted(i, j) = base(perm[i], j);
	const auto perm_run = run_mpme(CandidatePool(permuted), StoppingRule::fixed(25));
	for (std::size_t k = 0; k < 25; ++k)
		CHECK(perm[perm_run.selected[k]] == ref.selected[k]);
}

TEST_CASE("FrameSense examples") {
	const auto pool = three_row_pool();
	const auto two = run_framesense(pool, 2);
	CHECK(two.selected == std::vector<std::size_t>{0, 1});
	CHECK(framesense_elimination(pool, 2) == std::vector<std::size_t>{2});
	CHECK(run_framesense(pool, 3).selected == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("FrameSense first removal on equal-norm pools is the heaviest row of the squared Gram") {
	std::mt19937_64 gen(37);
	for (int rep = 0; rep < 30; ++rep) {
		Matrix m = random_matrix(25, 5, gen);
		for (std::size_t i = 0; i < 25; ++i) {
			const double nrm = std::sqrt(squared_norm(m.row(i)));
			for (double& x : m.row(i))
				x /= nrm;
		}
		const CandidatePool pool(m);
		std::size_t heaviest = 0;
		double best = -1.0;
		for (std::size_t i = 0; i < 25; ++i) {
			double s = 0.0;
			for (std::size_t j = 0; j < 25; ++j) {
				const double g = dot(m.row(i), m.row(j));
				s += g * g;
			}
			if (s > best) {
				best = s;
				heaviest = i;
			}
		}
		CHECK(framesense_elimination(pool, 24).front() == heaviest);
	}
}

TEST_CASE("FrameSense leaves the smallest frame potential among single removals") {
	std::mt19937_64 gen(38);
	const Matrix m = random_matrix(15, 4, gen);
	const CandidatePool pool(m);
	const auto order = framesense_elimination(pool, 14);
	double best = 1e300;
	std::size_t arg = 0;
	for (std::size_t r = 0; r < 15; ++r) {
		std::vector<std::size_t> rest;
		for (std::size_t i = 0; i < 15; ++i)
			if (i != r)
				rest.push_back(i);
		const double fp = metrics::frame_potential(m, rest);
		if (fp < best) {
			best = fp;
			arg = r;
		}
	}
	CHECK(order.front() == arg);
}

TEST_CASE("FrameSense threshold elimination") {
	std::mt19937_64 gen(39);
	const auto pool = gaussian_pool(80, 6, gen);
	const auto r = run_framesense_threshold(pool, StoppingRule::wcev(8.0));
	REQUIRE(r.satisfied);
	CHECK(lambda_min_of(pool, r.selected) >= 8.0);
	// One more elimination step would break the constraint (or reach n rows).
	if (r.M() > 6) {
		const auto order = framesense_elimination(pool, r.M() - 1);
		auto survivors = run_framesense(pool, r.M() - 1).selected;
		CHECK(lambda_min_of(pool, survivors) < 8.0);
		CHECK(order.size() == 80 - r.M() + 1);
	}
	const auto impossible = run_framesense_threshold(pool, StoppingRule::wcev(1e6));
	CHECK_FALSE(impossible.satisfied);
	CHECK(impossible.M() == 80);
}

TEST_CASE("convex relaxation examples") {
	const CandidatePool pool(Matrix::from_rows({{2, 0}, {0, 1}, {0, 1}}));
	const auto out = run_convex_relaxation(pool, 2);
	CHECK(out.placement.selected == std::vector<std::size_t>{0, 1});
	CHECK(out.weights.w[0] == doctest::Approx(1.0).epsilon(1e-6));

	const CandidatePool ortho(Matrix::identity(2));
	const auto o = run_convex_relaxation(ortho, 2);
	CHECK(o.weights.w[0] == doctest::Approx(1.0));
	CHECK(o.weights.w[1] == doctest::Approx(1.0));
	CHECK(o.placement.selected == std::vector<std::size_t>{0, 1});
}

TEST_CASE("convex relaxation weights stay feasible and the objective ascends") {
	std::mt19937_64 gen(40);
	for (int rep = 0; rep < 5; ++rep) {
		const auto pool = gaussian_pool(60, 6, gen);
		const auto out = run_convex_relaxation(pool, 15);
		double sum = 0.0;
		for (double w : out.weights.w) {
			CHECK(w >= -1e-6);
			CHECK(w <= 1 + 1e-6);
			sum += w;
		}
		CHECK(std::abs(sum - 15.0) <= 1e-6);
		const auto& tr = out.weights.objective_trace;
		for (std::size_t i = 1; i < tr.size(); ++i)
			CHECK(tr[i] >= tr[i - 1]);
		CHECK(out.placement.M() == 15);
		CHECK(as_set(out.placement.selected).size() == 15);
	}
}

TEST_CASE("convex relaxation optimum satisfies the capped-simplex optimality conditions") {
	// At the optimum, weights strictly inside (0, 1) share one gradient value;
	// weights at 1 have gradients above it and weights at 0 below it.
	std::mt19937_64 gen(41);
	const auto pool = gaussian_pool(12, 3, gen);
	RelaxationConfig cfg;
	cfg.max_iterations = 20000;
	cfg.gap_tolerance = 1e-10;
	const auto out = run_convex_relaxation(pool, 5, cfg);
	Matrix a(3, 3);
	for (std::size_t i = 0; i < 12; ++i)
		add_outer(a, pool.row(i), out.weights.w[i]);
	Eigen::MatrixXd inv = testing_support::to_eigen(a).inverse();
	std::vector<double> g(12);
	for (std::size_t i = 0; i < 12; ++i) {
		Eigen::Vector3d v(pool.row(i)[0], pool.row(i)[1], pool.row(i)[2]);
		g[i] = v.dot(inv * v);
	}
	double low_max = -1e300;
	double high_min = 1e300;
	for (std::size_t i = 0; i < 12; ++i) {
		if (out.weights.w[i] < 1 - 1e-3)
			low_max = std::max(low_max, g[i]);
		if (out.weights.w[i] > 1e-3)
			high_min = std::min(high_min, g[i]);
	}
	CHECK(low_max <= high_min + 1e-2);
}

TEST_CASE("convex threshold search") {
	std::mt19937_64 gen(42);
	const auto pool = gaussian_pool(40, 5, gen);
	const auto r = run_convex_threshold(pool, StoppingRule::wcev(3.0));
	REQUIRE(r.satisfied);
	CHECK(lambda_min_of(pool, r.selected) >= 3.0);
	if (r.M() > 5) {
		const auto smaller = run_convex_relaxation(pool, r.M() - 1);
		CHECK(lambda_min_of(pool, smaller.placement.selected) < 3.0);
	}
	const auto impossible = run_convex_threshold(pool, StoppingRule::wcev(1e6));
	CHECK_FALSE(impossible.satisfied);
	CHECK(impossible.M() == 40);
}

TEST_CASE("random baseline") {
	std::mt19937_64 gen(43);
	const auto pool = gaussian_pool(30, 4, gen);
	const auto a = run_random(pool, 10, 99);
	const auto b = run_random(pool, 10, 99);
	CHECK(a.selected == b.selected);
	CHECK(as_set(a.selected).size() == 10);
	CHECK(run_random(pool, 10, 100).selected != a.selected);
	CHECK(as_set(run_random(pool, 30, 5).selected).size() == 30);
}

TEST_CASE("exhaustive oracle examples") {
	const auto pool = three_row_pool();
	const auto lam = exhaustive_oracle(pool, 2, OracleObjective::max_lambda_min);
	CHECK(lam.selected == std::vector<std::size_t>{0, 1});
	CHECK(lam.lambda_trace.back() == doctest::Approx(1.0));
	const auto mse = exhaustive_oracle(pool, 2, OracleObjective::min_mse);
	CHECK(mse.selected == std::vector<std::size_t>{0, 1});
	CHECK(metrics::mse_index(gram_of_rows(pool.matrix(), mse.selected)) == doctest::Approx(2.0));
	CHECK(exhaustive_oracle(pool, 3, OracleObjective::max_lambda_min).selected ==
	      std::vector<std::size_t>{0, 1, 2});

	std::mt19937_64 gen(44);
	const auto big = gaussian_pool(60, 4, gen);
	CHECK_THROWS_AS(exhaustive_oracle(big, 30, OracleObjective::max_lambda_min), InvalidInputError);
	CHECK_THROWS_AS(exhaustive_oracle(big, 5, OracleObjective::max_lambda_min, 100), InvalidInputError);
}

TEST_CASE("binomial coefficients") {
	CHECK(binomial(5, 2) == 10);
	CHECK(binomial(12, 4) == 495);
	CHECK(binomial(100, 0) == 1);
	CHECK(binomial(3, 5) == 0);
	CHECK(binomial(62, 31) == 465428353255261088ULL);
	CHECK(binomial(100, 50) == UINT64_MAX);
}

TEST_CASE("greedy never beats the oracle") {
	std::mt19937_64 gen(45);
	for (int rep = 0; rep < 30; ++rep) {
		const auto pool = gaussian_pool(10, 3, gen);
		const auto oracle = exhaustive_oracle(pool, 4, OracleObjective::max_lambda_min);
		CHECK(run_mpme(pool, StoppingRule::fixed(4)).lambda_trace.back() <= oracle.lambda_trace.back() + 1e-12);
		CHECK(run_mnep(pool, StoppingRule::fixed(4)).lambda_trace.back() <= oracle.lambda_trace.back() + 1e-12);
	}
}

TEST_CASE("local optimization examples") {
	const auto pool = three_row_pool();
	const auto mpme = run_mpme(pool, StoppingRule::fixed(2));
	const auto improved = local_optimize(pool, mpme, Criterion::wcev);
	CHECK(as_set(improved.selected) == std::set<std::size_t>{0, 1});
	CHECK(improved.lambda_trace.back() == doctest::Approx(1.0));

	PlacementResult fixed_point;
	fixed_point.selected = {0, 1};
	const auto same = local_optimize(pool, fixed_point, Criterion::wcev);
	CHECK(same.selected == std::vector<std::size_t>{0, 1});
	CHECK(same.local_passes == 1);

	PlacementResult dup;
	dup.selected = {0, 0};
	CHECK_THROWS_AS(local_optimize(pool, dup, Criterion::wcev), InvalidInputError);
}

TEST_CASE("local optimization output is 2-opt under both criteria") {
	std::mt19937_64 gen(46);
	for (int rep = 0; rep < 12; ++rep) {
		const auto pool = gaussian_pool(20, 4, gen);
		const auto start = run_random(pool, 7, static_cast<std::uint64_t>(rep));
		for (Criterion c : {Criterion::wcev, Criterion::mse}) {
			const auto out = local_optimize(pool, start, c);
			CHECK_FALSE(out.local_pass_cap_hit);
			CHECK_FALSE(admits_improving_swap(pool, out.selected, c));
			CHECK(criterion_value(pool, out.selected, c) <= criterion_value(pool, start.selected, c));
		}
	}
}

TEST_CASE("local optimization escapes a singular start") {
	const CandidatePool pool(Matrix::from_rows({{1, 0}, {2, 0}, {0, 1}, {1, 1}}));
	PlacementResult start;
	start.selected = {0, 1};
	for (Criterion c : {Criterion::wcev, Criterion::mse}) {
		const auto out = local_optimize(pool, start, c);
		CHECK(std::isfinite(criterion_value(pool, out.selected, c)));
		CHECK_FALSE(admits_improving_swap(pool, out.selected, c));
	}
}

TEST_CASE("local optimization pass cap is reported, not thrown") {
	std::mt19937_64 gen(47);
	const auto pool = gaussian_pool(30, 4, gen);
	const auto start = run_random(pool, 8, 3);
	LocalSearchOptions opts;
	opts.max_passes = 1;
	const auto out = local_optimize(pool, start, Criterion::wcev, opts);
	CHECK(out.local_passes == 1);
	CHECK(out.local_pass_cap_hit == admits_improving_swap(pool, out.selected, Criterion::wcev));
}

TEST_CASE("strict improvement rule") {
	CHECK(strictly_improves(1.0, 2.0, 1e-12));
	CHECK_FALSE(strictly_improves(2.0, 2.0, 1e-12));
	CHECK_FALSE(strictly_improves(2.0 - 1e-14, 2.0, 1e-12));
	CHECK(strictly_improves(5.0, metrics::kInfinity, 1e-12));
	CHECK_FALSE(strictly_improves(metrics::kInfinity, metrics::kInfinity, 1e-12));
}

TEST_CASE("algorithm and criterion names round-trip") {
	for (auto a : {Algorithm::mpme, Algorithm::mnep, Algorithm::framesense, Algorithm::convex, Algorithm::random,
	               Algorithm::oracle})
		CHECK(parse_algorithm(to_string(a)) == a);
	CHECK_THROWS_AS(parse_algorithm("sparsense"), InvalidInputError);
	CHECK(parse_criterion("mse") == Criterion::mse);
	CHECK_THROWS_AS(parse_criterion("det"), InvalidInputError);
}
