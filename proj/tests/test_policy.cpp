#include <gtest/gtest.h>

#include <vector>

#include "decodeq/policy.hpp"

using namespace decodeq;

namespace {

Job job(JobId id, Nanos arrival, Nanos deadline) {
  return Job{id, JobKind::Primary, std::nullopt, arrival, deadline, 0};
}

JobRecord completed(Nanos deadline, Nanos completion, bool cutoff_hit = false) {
  JobRecord r;
  r.job = job(3, 0, deadline);
  r.start = 0;
  r.completion = completion;
  r.service = {completion, 0, completion, cutoff_hit};
  r.outcome = classify(completion, deadline);
  return r;
}

}  // namespace

TEST(Scheduler, EdfPicksEarliestDeadline) {
  const std::vector<Job> q{job(1, 0, us(80)), job(2, us(1), us(60))};
  EXPECT_EQ(select_next(q, SchedulerPolicy::EDF), 2u);
  EXPECT_EQ(select_next(q, SchedulerPolicy::FIFO), 1u);
}

TEST(Scheduler, EdfTieBreaksByArrivalThenId) {
  const std::vector<Job> q{job(5, us(2), us(50)), job(4, us(1), us(50)), job(3, us(1), us(50))};
  EXPECT_EQ(select_next(q, SchedulerPolicy::EDF), 3u);
  EXPECT_EQ(select_next(q, SchedulerPolicy::FIFO), 3u);
}

TEST(Scheduler, EmptyQueueIsAnError) {
  EXPECT_THROW(select_next(std::span<const Job>{}, SchedulerPolicy::EDF), ConfigError);
}

TEST(Scheduler, EdfInvariantUnderTimeScaling) {
  std::vector<Job> q{job(0, 0, 700), job(1, 10, 650), job(2, 20, 900), job(3, 30, 650)};
  const auto base = select_next(q, SchedulerPolicy::EDF);
  for (Nanos k : {2, 3, 1000}) {
    auto scaled = q;
    for (auto& j : scaled) {
      j.arrival *= k;
      j.deadline *= k;
    }
    EXPECT_EQ(select_next(scaled, SchedulerPolicy::EDF), base);
  }
}

TEST(Scheduler, ParseRoundTrip) {
  for (auto s : {SchedulerPolicy::EDF, SchedulerPolicy::FIFO})
    EXPECT_EQ(parse_scheduler(to_string(s)), s);
  EXPECT_THROW(parse_scheduler("lifo"), ConfigError);
}

TEST(Admission, CapIsOnWaitingJobs) {
  const AdmissionPolicy cap10{10};
  EXPECT_EQ(admit(10, cap10), Admission::Drop);
  EXPECT_EQ(admit(9, cap10), Admission::Admit);
  EXPECT_EQ(admit(0, AdmissionPolicy{0}), Admission::Drop);
  EXPECT_EQ(admit(1'000'000, AdmissionPolicy{}), Admission::Admit);
}

TEST(Rescue, BacklogTrigger) {
  RescuePolicy p{true, BacklogTrigger{2}};
  const auto r = completed(us(100), us(40));
  EXPECT_FALSE(rescue_trigger(r, 1, p));
  EXPECT_TRUE(rescue_trigger(r, 2, p));
  p.enabled = false;
  EXPECT_FALSE(rescue_trigger(r, 50, p));
}

TEST(Rescue, SlackTrigger) {
  const RescuePolicy p{true, SlackTrigger{us(5)}};
  EXPECT_TRUE(rescue_trigger(completed(us(100), us(97)), 0, p));
  EXPECT_TRUE(rescue_trigger(completed(us(100), us(95)), 0, p));
  EXPECT_FALSE(rescue_trigger(completed(us(100), us(94)), 0, p));
  EXPECT_TRUE(rescue_trigger(completed(us(100), us(140)), 0, p));
}

TEST(Rescue, CutoffHitTrigger) {
  const RescuePolicy p{true, CutoffHitTrigger{}};
  EXPECT_TRUE(rescue_trigger(completed(us(100), us(50), true), 0, p));
  EXPECT_FALSE(rescue_trigger(completed(us(100), us(50), false), 0, p));
}

TEST(Rescue, OnlyPrimariesTrigger) {
  const RescuePolicy p{true, BacklogTrigger{0}};
  auto r = completed(us(100), us(40));
  r.job.kind = JobKind::Rescue;
  r.job.parent = 0;
  EXPECT_FALSE(rescue_trigger(r, 10, p));
}

TEST(Rescue, JobInheritsParentDeadline) {
  const RescuePolicy p{true, BacklogTrigger{2}, us(10)};
  const auto parent = completed(us(100), us(40));
  const Job r = make_rescue_job(parent, p, us(40), 17);
  EXPECT_EQ(r.id, 17u);
  EXPECT_EQ(r.kind, JobKind::Rescue);
  EXPECT_EQ(r.parent, parent.job.id);
  EXPECT_EQ(r.arrival, us(40));
  EXPECT_EQ(r.deadline, us(100));
  const auto s = rescue_service(p);
  EXPECT_EQ(s.total, us(10));
  EXPECT_FALSE(s.cutoff_hit);
}

TEST(PolicySetValidation, Rejects) {
  PolicySet p;
  p.cutoff = 0;
  EXPECT_THROW(validate(p), ConfigError);
  p.cutoff.reset();
  p.rescue.enabled = true;
  p.rescue.budget = 0;
  EXPECT_THROW(validate(p), ConfigError);
  p.rescue.budget = us(10);
  p.rescue.trigger = SlackTrigger{-1};
  EXPECT_THROW(validate(p), ConfigError);
}

TEST(Scheduler, ListedCases) {
  const std::vector<Job> by_deadline{job(0, 0, us(30)), job(1, 0, us(10)), job(2, 0, us(20))};
  EXPECT_EQ(select_next(by_deadline, SchedulerPolicy::EDF), 1u);
  const std::vector<Job> by_arrival{job(0, us(5), us(90)), job(1, us(1), us(99)),
                                    job(2, us(3), us(10))};
  EXPECT_EQ(select_next(by_arrival, SchedulerPolicy::FIFO), 1u);
}

TEST(Rescue, SlackThresholdBoundary) {
  const RescuePolicy p{true, SlackTrigger{us(5)}};
  EXPECT_TRUE(rescue_trigger(completed(us(100), us(96)), 0, p));   // 4 us left
  EXPECT_FALSE(rescue_trigger(completed(us(100), us(94)), 0, p));  // 6 us left
}

TEST(Rescue, ParentPastDeadline) {
  const RescuePolicy p{true, SlackTrigger{us(5)}, us(10)};
  const auto parent = completed(us(100), us(130));
  const Job r = make_rescue_job(parent, p, us(130), 1);
  EXPECT_LT(r.deadline, r.arrival);
  EXPECT_EQ(classify(r.arrival + p.budget, r.deadline), Outcome::Miss);
}

TEST(Rescue, ListedInjection) {
  const RescuePolicy p{true, BacklogTrigger{2}, us(10)};
  const Job r = make_rescue_job(completed(us(100), us(90)), p, us(90), 1);
  EXPECT_EQ(r.arrival, us(90));
  EXPECT_EQ(r.deadline, us(100));
  EXPECT_EQ(rescue_service(p).total, us(10));
}
