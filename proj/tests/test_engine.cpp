#include <gtest/gtest.h>

#include "decodeq/engine.hpp"
#include "support.hpp"

using namespace decodeq;
using support::job;

namespace {

RunLog run_fixed(const std::vector<Job>& jobs, std::size_t servers, PolicySet policy = {}) {
  return Simulator(FixedService{us(20)}, policy, servers, 0).run(jobs);
}

}  // namespace

TEST(Engine, SingleJob) {
  const auto log = run_fixed({job(0, us(3), us(103), 0)}, 1);
  const auto& r = log.records.at(0);
  EXPECT_EQ(*r.start, us(3));
  EXPECT_EQ(*r.completion, us(23));
  EXPECT_EQ(r.outcome, Outcome::OnTime);
  EXPECT_EQ(log.horizon, us(23));
}

TEST(Engine, TwoJobsOneServer) {
  const auto log = run_fixed({job(0, 0, us(30), 0), job(1, 0, us(30), 0)}, 1);
  EXPECT_EQ(*log.records[0].completion, us(20));
  EXPECT_EQ(log.records[0].outcome, Outcome::OnTime);
  EXPECT_EQ(*log.records[1].start, us(20));
  EXPECT_EQ(*log.records[1].completion, us(40));
  EXPECT_EQ(log.records[1].outcome, Outcome::Miss);
  EXPECT_EQ(log.backlog_trace,
            (std::vector<BacklogPoint>{{0, 1}, {us(20), 0}}));
}

TEST(Engine, TwoJobsTwoServers) {
  const auto log = run_fixed({job(0, 0, us(30), 0), job(1, 0, us(30), 0)}, 2);
  for (const auto& r : log.records) {
    EXPECT_EQ(*r.completion, us(20));
    EXPECT_EQ(r.outcome, Outcome::OnTime);
  }
  EXPECT_NE(log.records[0].server, log.records[1].server);
}

TEST(Engine, BacklogAt) {
  const auto log = run_fixed({job(0, us(5), us(35), 0), job(1, us(5), us(35), 0)}, 1);
  EXPECT_EQ(backlog_at(log, 0), 0u);
  EXPECT_EQ(backlog_at(log, us(4)), 0u);
  EXPECT_EQ(backlog_at(log, us(10)), 1u);
  EXPECT_EQ(backlog_at(log, us(45)), 0u);
  EXPECT_THROW(backlog_at(log, us(46)), ConfigError);
  EXPECT_THROW(backlog_at(log, -1), ConfigError);
}

TEST(Engine, Utilization) {
  const auto idle = run_fixed({}, 1);
  EXPECT_EQ(utilization(idle).pooled, 0.0);
  const auto one = run_fixed({job(0, 0, us(100), 0)}, 1);
  EXPECT_DOUBLE_EQ(utilization(one).pooled, 1.0);
  const auto two = run_fixed({job(0, 0, us(30), 0), job(1, 0, us(30), 0)}, 1);
  EXPECT_EQ(two.horizon, us(40));
  EXPECT_DOUBLE_EQ(utilization(two).pooled, 1.0);
  const auto spread = run_fixed({job(0, 0, us(30), 0), job(1, 0, us(30), 0)}, 2);
  EXPECT_DOUBLE_EQ(utilization(spread).pooled, 1.0);
  EXPECT_EQ(utilization(spread).per_server, (std::vector<double>{1.0, 1.0}));
}

TEST(Engine, CompletionFreesServerForSimultaneousArrival) {
  const auto log = run_fixed({job(0, 0, us(100), 0), job(1, us(20), us(120), 0)}, 1);
  EXPECT_EQ(*log.records[1].start, us(20));
  EXPECT_EQ(log.backlog_trace, (std::vector<BacklogPoint>{{0, 0}}));
}

TEST(Engine, AdmissionDropsAtCap) {
  PolicySet p;
  p.admission.cap = 1;
  const auto log = run_fixed(
      {job(0, 0, us(100), 0), job(1, 0, us(100), 0), job(2, 0, us(100), 0)}, 1, p);
  EXPECT_EQ(log.records[0].outcome, Outcome::OnTime);
  EXPECT_EQ(log.records[1].outcome, Outcome::OnTime);
  EXPECT_EQ(log.records[2].outcome, Outcome::Drop);
  EXPECT_FALSE(log.records[2].start);
}

TEST(Engine, PastDeadlineJobsStillServed) {
  const auto log = run_fixed({job(0, 0, us(100), 0), job(1, 0, us(5), 0)}, 1,
                             PolicySet{SchedulerPolicy::FIFO});
  EXPECT_EQ(*log.records[1].completion, us(40));
  EXPECT_EQ(log.records[1].outcome, Outcome::Miss);
}

TEST(Engine, RejectsMisnumberedJobs) {
  EXPECT_THROW(run_fixed({job(3, 0, us(100), 0)}, 1), InvariantViolation);
  EXPECT_THROW(Simulator(FixedService{}, {}, 0, 0), ConfigError);
}

TEST(Engine, RescueWithoutCascade) {
  PolicySet p;
  p.rescue = RescuePolicy{true, SlackTrigger{us(5)}, us(10)};
  const auto log = run_fixed({job(0, 0, us(22), 0)}, 1, p);
  ASSERT_EQ(log.records.size(), 2u);
  EXPECT_TRUE(log.records[0].rescue_triggered);
  const auto& r = log.records[1];
  EXPECT_EQ(r.job.kind, JobKind::Rescue);
  EXPECT_EQ(r.job.parent, 0u);
  EXPECT_EQ(*r.start, us(20));
  EXPECT_EQ(*r.completion, us(30));
  EXPECT_EQ(r.outcome, Outcome::Miss);
  EXPECT_FALSE(r.rescue_triggered);
}

TEST(Engine, JitterKeyedById) {
  ChmParams chm;
  chm.compute = WorkloadModelParams{us(10), us(1), std::nullopt};
  chm.memory.sram_budget = 8192;
  chm.jitter = JitterParams{};
  const Simulator sim(chm, {}, 1, 99);
  const Job a = job(7, 0, us(100), 3);
  EXPECT_EQ(sim.service_for(a), sim.service_for(a));
  EXPECT_GE(sim.service_for(a).compute, us(13));
}

// Hand-checked traces against the tick-stepping oracle.
class OracleTraces : public ::testing::TestWithParam<support::NamedTrace> {};

TEST_P(OracleTraces, EngineMatchesOracle) {
  const auto& c = GetParam().trace;
  EXPECT_EQ(support::mismatch(support::run_engine(c.jobs, c.setup),
                              support::run_oracle(c.jobs, c.setup)),
            std::nullopt);
}

INSTANTIATE_TEST_SUITE_P(Hand, OracleTraces, ::testing::ValuesIn(support::hand_traces()),
                         [](const auto& info) { return info.param.name; });
