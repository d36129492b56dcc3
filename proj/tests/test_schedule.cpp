#include <doctest.h>

#include "povmkit/schedule.hpp"

using namespace povmkit;

TEST_SUITE("schedule") {

TEST_CASE("paper-shaped blended plan lands on 278 jobs") {
  const Schedule s = blended_schedule(70000, 100, 4, 100, JobCaps{300, 100});
  CHECK(s.jobs.size() == 278);

  // Each job carries 4 copies of each of the 12 QDT circuits.
  std::uint64_t qdt_shots_per_circuit = 0;
  for (const QdtInstance& inst : qdt_instances(s)) {
    if (inst.circuit == 0) {
      qdt_shots_per_circuit += static_cast<std::uint64_t>(inst.shots);
    }
  }
  CHECK(qdt_shots_per_circuit == 111200);  // 1.112e5 per QDT circuit

  // Shot conservation across the whole schedule.
  CHECK(s.total_shots() ==
        70000ULL * 100ULL + 278ULL * 48ULL * 100ULL);
}

TEST_CASE("single-setting blended job holds 13 circuits") {
  const Schedule s = blended_schedule(1, 100, 1, 100, JobCaps{300, 100});
  REQUIRE(s.jobs.size() == 1);
  CHECK(s.jobs[0].circuits.size() == 13);
}

TEST_CASE("infeasible caps are rejected") {
  CHECK_THROWS_AS(blended_schedule(10, 100, 1, 100, JobCaps{12, 100}),
                  std::invalid_argument);
  CHECK_THROWS_AS(blended_schedule(10, 200, 1, 100, JobCaps{300, 100}),
                  std::invalid_argument);
  CHECK_THROWS_AS(blended_schedule(10, 100, 1, 200, JobCaps{300, 100}),
                  std::invalid_argument);
}

TEST_CASE("regular schedule leads with the full QDT job") {
  const Schedule s = regular_schedule(500, 100, 100000, JobCaps{300, 100});
  REQUIRE(!s.jobs.empty());
  const Job& lead = s.jobs[0];
  CHECK(lead.circuits.size() == 12);
  std::uint64_t qdt_total = 0;
  for (const auto& c : lead.circuits) {
    CHECK(c.kind == CircuitKind::Qdt);
    qdt_total += static_cast<std::uint64_t>(c.shots);
  }
  CHECK(qdt_total == 1200000);  // 1.2e6 shots in the leading job

  // Remaining jobs are experiment-only in plan order.
  int next = 0;
  for (std::size_t j = 1; j < s.jobs.size(); ++j) {
    for (const auto& c : s.jobs[j].circuits) {
      CHECK(c.kind == CircuitKind::Experiment);
      CHECK(c.id == next++);
    }
  }
  CHECK(next == 500);
}

TEST_CASE("regular schedule with no experiment circuits is QDT-only") {
  const Schedule s = regular_schedule(0, 1, 1000, JobCaps{300, 100});
  REQUIRE(s.jobs.size() == 1);
  CHECK(s.jobs[0].circuits.size() == 12);
}

TEST_CASE("blended and regular schedules conserve the same totals") {
  // 10 jobs of blended QDT at 100 shots x 1 repeat matches a regular
  // schedule with 1000 shots per circuit.
  const Schedule blended =
      blended_schedule(2880, 10, 1, 100, JobCaps{300, 100});
  REQUIRE(blended.jobs.size() == 10);
  const Schedule regular = regular_schedule(2880, 10, 1000, JobCaps{300, 100});
  CHECK(blended.total_shots() == regular.total_shots());
}

TEST_CASE("experiment circuits preserve plan order in blended mode") {
  const Schedule s = blended_schedule(1000, 50, 2, 50, JobCaps{100, 50});
  int next = 0;
  for (const auto& job : s.jobs) {
    for (const auto& c : job.circuits) {
      if (c.kind == CircuitKind::Experiment) CHECK(c.id == next++);
    }
  }
  CHECK(next == 1000);
  const auto map = setting_to_job(s);
  CHECK(map.size() == 1000);
}

TEST_CASE("blending evenness within jobs and across windows") {
  const Schedule s = blended_schedule(5000, 100, 4, 100, JobCaps{300, 100});
  // Every job carries the identical QDT block, so any window of k jobs has
  // exactly k times the per-job QDT shot share; check the per-job share and
  // the in-job spread.
  for (const auto& job : s.jobs) {
    int qdt = 0;
    int longest_exp_run = 0;
    int run = 0;
    for (const auto& c : job.circuits) {
      if (c.kind == CircuitKind::Qdt) {
        ++qdt;
        longest_exp_run = std::max(longest_exp_run, run);
        run = 0;
      } else {
        ++run;
      }
    }
    longest_exp_run = std::max(longest_exp_run, run);
    CHECK(qdt == 48);
    // 252 experiment circuits interleaved among 48 QDT instances: runs of
    // at most ceil(252/48) + 1.
    CHECK(longest_exp_run <= 7);
  }
}

TEST_CASE("schedule csv lists every circuit") {
  const Schedule s = blended_schedule(1, 10, 1, 10, JobCaps{100, 10});
  const std::string csv = schedule_to_csv(s);
  CHECK(csv.rfind("job,slot_start,circuit_kind,circuit_id,shots\n", 0) == 0);
  std::size_t lines = 0;
  for (char c : csv) lines += c == '\n';
  CHECK(lines == 1 + 13);
}

TEST_CASE("qdt circuit ids cycle through the twelve circuits") {
  const Schedule s = blended_schedule(10, 10, 3, 10, JobCaps{200, 10});
  std::array<int, kQdtCircuitCount> seen{};
  for (const QdtInstance& inst : qdt_instances(s)) {
    ++seen[static_cast<std::size_t>(inst.circuit)];
  }
  for (int c = 0; c < kQdtCircuitCount; ++c) {
    CHECK(seen[static_cast<std::size_t>(c)] ==
          3 * static_cast<int>(s.jobs.size()));
  }
}

}  // TEST_SUITE
