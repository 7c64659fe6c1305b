#include <gtest/gtest.h>

#include <set>

#include "reduced.hpp"
#include "ptree/models.hpp"
#include "ptree/simulate.hpp"

using namespace ptree;
namespace pts = ptree::testing;

TEST(Models, KernelsOwnEveryUnknownExactlyOnce) {
  for (auto& r : pts::all_reduced()) {
    SCOPED_TRACE(r.name);
    EXPECT_NO_THROW(audit_kernels(*r.model));
  }
}

TEST(Models, InitialStateIsValidAndTraceWidthMatches) {
  for (auto& r : pts::all_reduced()) {
    SCOPED_TRACE(r.name);
    Rng rng(3);
    r.model->initialize(rng);
    EXPECT_NO_THROW(r.model->check_state());
    std::vector<double> row;
    r.model->trace(row);
    EXPECT_EQ(row.size(), r.model->trace_names().size());
    auto names = r.model->trace_names();
    EXPECT_EQ(std::set<std::string>(names.begin(), names.end()).size(), names.size());
  }
}

TEST(Models, SweepsPreserveInvariants) {
  for (auto& r : pts::all_reduced()) {
    SCOPED_TRACE(r.name);
    Rng rng(4);
    r.model->initialize(rng);
    auto ks = r.model->kernels();
    for (int i = 0; i < 300; ++i) {
      sweep(ks, rng, i < 150, nullptr, i);
      ASSERT_NO_THROW(r.model->check_state());
    }
  }
}

TEST(Models, CloneIsIndependent) {
  auto r = pts::reduced_cjs();
  Rng rng(5);
  r.model->initialize(rng);
  auto copy = r.model->clone();
  std::vector<double> before, after, other;
  copy->trace(before);
  auto ks = r.model->kernels();
  for (int i = 0; i < 20; ++i) sweep(ks, rng, false, nullptr, i);
  copy->trace(after);
  EXPECT_EQ(before, after);
  r.model->trace(other);
  EXPECT_NE(before, other);
}

TEST(Models, AuditCatchesDoubleOwnership) {
  struct Bad : Model {
    std::string kind() const override { return "bad"; }
    std::vector<std::string> unknowns() const override { return {"a", "b"}; }
    std::vector<Kernel> kernels() override {
      auto noop = [](Rng&, bool) { return KernelStats{}; };
      return {{"k1", {"a", "b"}, false, noop}, {"k2", {"b"}, false, noop}};
    }
    std::vector<std::string> trace_names() const override { return {}; }
    void trace(std::vector<double>&) const override {}
    void initialize(Rng&) override {}
    std::unique_ptr<Model> clone() const override { return std::make_unique<Bad>(*this); }
  } bad;
  EXPECT_THROW(audit_kernels(bad), std::logic_error);
}

TEST(Models, KindNamesRoundTrip) {
  for (auto k : {ModelKind::CJS, ModelKind::JointCRCD, ModelKind::RR, ModelKind::HierCounts, ModelKind::LongSeriesOPT})
    EXPECT_EQ(parse_model_kind(model_kind_name(k)), k);
  EXPECT_ANY_THROW(parse_model_kind("nonsense"));
}

TEST(Models, BuildDispatchesOnKind) {
  for (auto& r : pts::all_reduced()) {
    if (r.name.rfind("HLPT", 0) == 0) continue;
    SCOPED_TRACE(r.name);
    EXPECT_EQ(r.model->kind().rfind(model_kind_name(r.spec.kind), 0), 0u);
  }
}

TEST(Models, DataShapeErrorsNameTheProblem) {
  auto spec = ModelSpec::defaults(ModelKind::CJS, {1, 2, 3});
  ModelData data;
  data.histories.K = 4;
  data.histories.rows = {{1, 0, 0, 1}};
  try {
    validate_data(spec, data);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).size(), 0u);
  }
  spec = ModelSpec::defaults(ModelKind::RR, {1, 2});
  spec.U = 1;
  ModelData rr;
  rr.recoveries = {{1, 0}, {2, 0}};  // below the diagonal
  rr.marked = {5, 5};
  EXPECT_THROW(validate_data(spec, rr), DataError);
}

TEST(Models, SpecValidationRejectsNonsense) {
  auto spec = ModelSpec::defaults(ModelKind::LongSeriesOPT, {1, 2});
  spec.nested.period_lengths = {2, 2};
  spec.rho = 1.5;
  EXPECT_ANY_THROW(spec.validate());
  auto cjs = ModelSpec::defaults(ModelKind::CJS, {1});
  EXPECT_ANY_THROW(cjs.validate());
}
