#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "tasq/error.hpp"
#include "tasq/features.hpp"
#include "tasq/workload.hpp"

using namespace tasq;

namespace {

Operator make_op(int id, std::uint16_t kind, double cardinality) {
  Operator op;
  op.id = id;
  op.physical_op = kind;
  op.estimated_cardinality = cardinality;
  return op;
}

Job two_op_job() {
  Job job;
  job.id = "j";
  job.stage_count = 2;
  job.operators.push_back(make_op(0, 3, 10.0));  // Filter
  job.operators.push_back(make_op(1, 3, 20.0));  // Filter
  job.operators.push_back(make_op(2, 6, 5.0));   // HashJoin
  job.edges = {{0, 2}, {1, 2}};
  return job;
}

}  // namespace

TEST_CASE("vocabulary files load one level per line") {
  const auto path = std::filesystem::temp_directory_path() / "tasq_test_vocab.txt";
  {
    std::ofstream out(path);
    out << "Alpha\nBeta\nOther\n";
  }
  const Vocabulary vocab = Vocabulary::from_file(path.string());
  CHECK(vocab.size() == 3);
  CHECK(vocab.index_of("Beta") == 1);
  CHECK(vocab.index_of("Missing") == 2);
  std::filesystem::remove(path);

  {
    std::ofstream out(path);
    out << "Alpha\nBeta\n";  // no Other bucket
  }
  CHECK_THROWS_AS(Vocabulary::from_file(path.string()), Error);
  std::filesystem::remove(path);
}

TEST_CASE("vocabularies and widths") {
  CHECK(Vocabulary::physical_ops().size() == 36);   // 35 named kinds + Other
  CHECK(Vocabulary::partition_kinds().size() == 5); // 4 named kinds + Other
  Featurizer f;
  CHECK(f.operator_width() == 10 + 36 + 5);
  CHECK(f.job_width() == 10 + 36 + 5 + 2);

  bool known = false;
  CHECK(Vocabulary::physical_ops().index_of("Filter", &known) == 3);
  CHECK(known);
  CHECK(Vocabulary::physical_ops().index_of("NoSuchOp", &known) ==
        Vocabulary::physical_ops().other_index());
  CHECK_FALSE(known);
}

TEST_CASE("featurize_operator standardizes numerics and one-hots categoricals") {
  Job job = two_op_job();
  Featurizer f;
  f.fit({job});

  SUBCASE("all-zero operator maps to standardized zeros") {
    const Operator zero = make_op(9, 0, 0.0);
    const auto row = f.featurize_operator(zero);
    // log1p(0) = 0, standardized with the fitted mean/stddev
    const auto& stats = f.operator_stats();
    for (std::size_t i = 0; i < Featurizer::kNumericCount; ++i)
      CHECK(row[i] == doctest::Approx((0.0 - stats.mean[i]) / stats.stddev[i]));
  }
  SUBCASE("unknown physical_op lands in the Other slot") {
    Operator op = make_op(9, 999, 1.0);
    const auto row = f.featurize_operator(op);
    CHECK(row[Featurizer::kNumericCount + Vocabulary::physical_ops().other_index()] == 1.0);
    double onehot_total = 0.0;
    for (std::size_t i = 0; i < 36; ++i) onehot_total += row[Featurizer::kNumericCount + i];
    CHECK(onehot_total == 1.0);
  }
}

TEST_CASE("aggregate_job means, counts and appended sizes") {
  const Job job = two_op_job();
  Featurizer f;
  const auto raw = f.raw_job_vector(job);
  CHECK(raw[0] == doctest::Approx((10.0 + 20.0 + 5.0) / 3.0));  // mean pre-transform
  CHECK(raw[Featurizer::kNumericCount + 3] == 2.0);             // Filter count
  CHECK(raw[Featurizer::kNumericCount + 6] == 1.0);             // HashJoin count
  CHECK(raw[f.job_width() - 2] == 3.0);                         // operator count
  CHECK(raw[f.job_width() - 1] == 2.0);                         // stage count

  SUBCASE("single-operator job aggregates to that operator") {
    Job single;
    single.id = "s";
    single.stage_count = 1;
    single.operators.push_back(make_op(0, 5, 123.0));
    const auto v = f.raw_job_vector(single);
    const auto op_row = f.raw_operator_row(single.operators[0]);
    for (std::size_t i = 0; i < Featurizer::kNumericCount; ++i)
      CHECK(v[i] == doctest::Approx(op_row[i]));
    CHECK(v[f.job_width() - 2] == 1.0);
  }
  SUBCASE("identical operators aggregate to one operator's numerics") {
    Job triple;
    triple.id = "t";
    triple.stage_count = 1;
    for (int i = 0; i < 3; ++i) triple.operators.push_back(make_op(i, 7, 44.0));
    const auto v = f.raw_job_vector(triple);
    const auto op_row = f.raw_operator_row(triple.operators[0]);
    for (std::size_t i = 0; i < Featurizer::kNumericCount; ++i)
      CHECK(v[i] == doctest::Approx(op_row[i]));
  }
  SUBCASE("empty job is rejected") {
    Job empty;
    empty.id = "e";
    CHECK_THROWS_AS(f.raw_job_vector(empty), Error);
  }
}

TEST_CASE("adjacency matrix") {
  SUBCASE("chain") {
    Job job;
    job.stage_count = 1;
    for (int i = 0; i < 3; ++i) job.operators.push_back(make_op(i, 0, 1.0));
    job.edges = {{0, 1}, {1, 2}};
    const Matrix m = adjacency(job);
    CHECK(m.at(0, 1) == 1.0);
    CHECK(m.at(1, 2) == 1.0);
    double total = 0.0;
    for (const double v : m.data) total += v;
    CHECK(total == 2.0);
  }
  SUBCASE("no edges gives the zero matrix") {
    Job job;
    job.stage_count = 1;
    job.operators.push_back(make_op(0, 0, 1.0));
    job.operators.push_back(make_op(1, 0, 1.0));
    const Matrix m = adjacency(job);
    for (const double v : m.data) CHECK(v == 0.0);
  }
  SUBCASE("unknown id is rejected") {
    Job job = two_op_job();
    job.edges.emplace_back(0, 77);
    CHECK_THROWS_AS(adjacency(job), Error);
  }
  SUBCASE("cycle is rejected") {
    Job job;
    job.stage_count = 1;
    for (int i = 0; i < 3; ++i) job.operators.push_back(make_op(i, 0, 1.0));
    job.edges = {{0, 1}, {1, 2}, {2, 0}};
    CHECK_THROWS_AS(adjacency(job), Error);
  }
}

TEST_CASE("standardization statistics normalize the training split") {
  const Workload w = generate(GeneratorConfig{.n_jobs = 60, .n_templates = 8}, 17);
  Featurizer f;
  f.fit(w.jobs);

  const std::size_t width = f.job_width();
  std::vector<double> mean(width, 0.0);
  std::vector<double> var(width, 0.0);
  std::vector<std::vector<double>> rows;
  for (const Job& job : w.jobs) rows.push_back(f.job_vector(job));
  for (const auto& row : rows) {
    CHECK(row.size() == width);  // dimensional stability
    for (std::size_t i = 0; i < width; ++i) mean[i] += row[i];
  }
  for (double& m : mean) m /= static_cast<double>(rows.size());
  for (const auto& row : rows)
    for (std::size_t i = 0; i < width; ++i) var[i] += (row[i] - mean[i]) * (row[i] - mean[i]);
  for (std::size_t i = 0; i < width; ++i) {
    CHECK(mean[i] == doctest::Approx(0.0).epsilon(1e-6));
    const double stddev = std::sqrt(var[i] / static_cast<double>(rows.size()));
    // constant features standardize to all-zero columns instead of 1
    if (stddev > 1e-9) CHECK(stddev == doctest::Approx(1.0).epsilon(1e-6));
  }
}
