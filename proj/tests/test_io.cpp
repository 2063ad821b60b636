#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "rad2img.hpp"

using namespace rad2img;

namespace {

std::string header() {
  std::string h = "study_id";
  for (auto n : kConditionNames) h += "," + std::string(n);
  return h + "\n";
}

std::string row(const std::string& id, const std::vector<std::string>& cells) {
  std::string r = id;
  for (const auto& c : cells) r += "," + c;
  return r + "\n";
}

std::vector<std::string> cells(const std::string& first, const std::string& rest) {
  std::vector<std::string> v(kNumConditions, rest);
  v[0] = first;
  return v;
}

Corpus random_full_corpus(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> lab(0, 3);
  std::uniform_real_distribution<double> u;
  Corpus c;
  for (int i = 0; i < n; ++i) {
    Study s;
    s.id = "id," + std::to_string(i) + "\"q\"";
    ReportLabels r;
    BinaryLabels t;
    Probabilities p;
    for (std::size_t j = 0; j < kNumConditions; ++j) {
      r[j] = static_cast<ReportLabel>(lab(rng));
      t[j] = u(rng) < 0.5 ? BinaryLabel::Positive : BinaryLabel::Negative;
      p[j] = u(rng);
    }
    p[0] = 0.1 + 0.2;  // not exactly representable in short decimal
    s.report_labels = r;
    s.image_truth = t;
    s.probabilities = p;
    s.impression = "line one,\n\"quoted\" two";
    c.studies.push_back(s);
  }
  return c;
}

}  // namespace

TEST(IngestReportLabels, CellEncoding) {
  auto c = parse_report_labels(header() + row("s1", cells("1.0", "")) + row("s2", cells("", "-1.0")));
  ASSERT_EQ(c.size(), 2u);
  const auto& l1 = *c.studies[0].report_labels;
  EXPECT_EQ(l1[0], ReportLabel::Positive);
  for (std::size_t j = 1; j < kNumConditions; ++j) EXPECT_EQ(l1[j], ReportLabel::Blank);
  EXPECT_EQ((*c.studies[1].report_labels)[5], ReportLabel::Uncertain);
  EXPECT_TRUE(c.warnings.empty());
}

TEST(IngestReportLabels, BadCellNamesRowAndColumn) {
  auto bad = cells("", "");
  bad[5] = "2.0";
  try {
    parse_report_labels(header() + row("s1", cells("", "")) + row("s2", bad));
    FAIL() << "expected error";
  } catch (const ValidationError& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("row 2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("Edema"), std::string::npos) << msg;
  }
}

TEST(IngestReportLabels, NoFindingAlphabetWarning) {
  auto c = parse_report_labels(header() + row("s1", cells("0.0", "")));
  ASSERT_EQ(c.warnings.size(), 1u);
  EXPECT_NE(c.warnings[0].find("s1"), std::string::npos);
}

TEST(IngestReportLabels, HeaderErrors) {
  EXPECT_THROW(parse_report_labels("study_id,Edema\ns1,1.0\n"), ValidationError);
  EXPECT_THROW(parse_report_labels(header().substr(0, header().size() - 1) + ",Nodule\n"),
               ValidationError);
  EXPECT_THROW(parse_report_labels(header() + row("s1", cells("", "")) + row("s1", cells("", ""))),
               ValidationError);
}

TEST(IngestImageTruth, CellsAndErrors) {
  auto c = parse_image_truth(header() + row("s1", cells("1", "0")));
  EXPECT_EQ((*c.studies[0].image_truth)[0], BinaryLabel::Positive);
  EXPECT_EQ((*c.studies[0].image_truth)[1], BinaryLabel::Negative);
  EXPECT_THROW(parse_image_truth(header() + row("s1", cells("", "0"))), ValidationError);
  EXPECT_THROW(parse_image_truth(header() + row("s1", cells("-1", "0"))), ValidationError);
}

TEST(IngestProbabilities, RangeChecked) {
  auto c = parse_probabilities(header() + row("s1", cells("0.25", "1")));
  EXPECT_DOUBLE_EQ((*c.studies[0].probabilities)[0], 0.25);
  EXPECT_THROW(parse_probabilities(header() + row("s1", cells("1.5", "0"))), ValidationError);
  EXPECT_THROW(parse_probabilities(header() + row("s1", cells("nan", "0"))), ValidationError);
  EXPECT_THROW(parse_probabilities(header() + row("s1", cells("", "0"))), ValidationError);
}

TEST(IngestFiles, MissingFileIsIoError) {
  EXPECT_THROW(ingest_report_labels("/nonexistent/dir/file.csv"), IoError);
}

TEST(RoundTrip, AllFileTypesLossless) {
  auto c = random_full_corpus(30, 1);
  auto r = parse_report_labels(write_report_labels(c));
  auto t = parse_image_truth(write_image_truth(c));
  auto p = parse_probabilities(write_probabilities(c));
  auto m = parse_impressions(write_impressions(c));
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_EQ(r.studies[i].id, c.studies[i].id);
    EXPECT_EQ(r.studies[i].report_labels, c.studies[i].report_labels);
    EXPECT_EQ(t.studies[i].image_truth, c.studies[i].image_truth);
    EXPECT_EQ(p.studies[i].probabilities, c.studies[i].probabilities);
    EXPECT_EQ(m.studies[i].impression, c.studies[i].impression);
  }
  // Second pass is byte-identical.
  EXPECT_EQ(write_probabilities(p), write_probabilities(c));
}

TEST(RoundTrip, ThroughDisk) {
  auto dir = std::filesystem::temp_directory_path() / "rad2img_io_test";
  std::filesystem::create_directories(dir);
  auto c = random_full_corpus(5, 2);
  csv::write_file(dir / "r.csv", write_report_labels(c));
  EXPECT_EQ(ingest_report_labels(dir / "r.csv").studies[3].report_labels, c.studies[3].report_labels);
  std::filesystem::remove_all(dir);
}

TEST(Join, Examples) {
  auto c = random_full_corpus(3, 3);
  Corpus a, b;
  for (const auto& s : c.studies) {
    Study x{s.id, std::nullopt, s.report_labels, std::nullopt, std::nullopt};
    a.studies.push_back(x);
  }
  for (std::size_t i = 0; i < 2; ++i) {
    Study y{c.studies[i].id, std::nullopt, std::nullopt, c.studies[i].image_truth, std::nullopt};
    b.studies.push_back(y);
  }
  std::vector<Corpus> two{a, b};
  auto j = join_corpora(two);
  EXPECT_EQ(j.corpus.size(), 2u);
  EXPECT_EQ(j.dropped, (std::vector<std::size_t>{1, 0}));
  EXPECT_TRUE(j.corpus.has_report_labels());
  EXPECT_TRUE(j.corpus.has_image_truth());

  std::vector<Corpus> same{a, a};
  auto k = join_corpora(same);
  EXPECT_EQ(k.corpus.size(), 3u);
  EXPECT_EQ(k.dropped, (std::vector<std::size_t>{0, 0}));

  Corpus other;
  other.studies.push_back({"zzz", std::nullopt, std::nullopt, std::nullopt, std::nullopt});
  std::vector<Corpus> disjoint{a, other};
  EXPECT_THROW(join_corpora(disjoint), ValidationError);
}

TEST(Join, ConflictingChannelRejected) {
  auto c = random_full_corpus(2, 4);
  Corpus d = c;
  (*d.studies[1].report_labels)[3] =
      (*d.studies[1].report_labels)[3] == ReportLabel::Blank ? ReportLabel::Positive : ReportLabel::Blank;
  std::vector<Corpus> both{c, d};
  EXPECT_THROW(join_corpora(both), ValidationError);
}

TEST(Csv, QuotingRoundTrip) {
  std::vector<std::string> fields{"plain", "has,comma", "has \"quote\"", "multi\nline", ""};
  auto t = csv::parse("h1,h2,h3,h4,h5\r\n" + csv::format_row(fields));
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0], fields);
}

namespace {

MetricsReport reference_like_report() {
  const Condition cs[] = {Condition::Atelectasis,     Condition::Cardiomegaly,
                          Condition::Edema,           Condition::PleuralEffusion,
                          Condition::EnlargedCardiomediastinum, Condition::LungOpacity,
                          Condition::SupportDevices,  Condition::NoFinding};
  const double s[] = {0.230, 0.422, 0.453, 0.638, 0.089, 0.683, 0.863, 0.381};
  const long n[] = {153, 151, 78, 104, 253, 264, 261, 62};
  return make_metrics_report("Low F1", cs, s, n);
}

}  // namespace

TEST(Report, MarkdownHasConditionAndAverageRows) {
  auto md = emit_metrics_report(reference_like_report(), Format::Markdown);
  int lines = 0;
  for (char ch : md) lines += ch == '\n';
  // Title, blank line, header, separator, 8 conditions, 2 averages.
  EXPECT_EQ(lines, 14);
  EXPECT_NE(md.find("| Atelectasis (n=153) | 0.230 |"), std::string::npos) << md;
  EXPECT_NE(md.find("| Average | 0.470 |"), std::string::npos) << md;
  EXPECT_NE(md.find("| Weighted Average | 0.492 |"), std::string::npos) << md;
}

TEST(Report, CsvAndJsonCarryIdenticalValues) {
  auto r = reference_like_report();
  auto from_csv = parse_table_csv(emit_metrics_report(r, Format::Csv));
  auto from_json = parse_table_json(emit_metrics_report(r, Format::Json));
  EXPECT_TRUE(from_csv == from_json);
  EXPECT_EQ(from_csv.rows.size(), 10u);
  EXPECT_EQ(from_csv.rows[8].values[0], r.macro_average);
  EXPECT_EQ(from_csv.rows[0].n_positive, 153);
}

TEST(Report, EmptyEvaluationSetRejected) {
  MetricsReport empty;
  EXPECT_THROW(emit_metrics_report(empty, Format::Csv), ValidationError);
  EXPECT_THROW(parse_format("xml"), ValidationError);
}

TEST(Report, RecordTableFormats) {
  RecordTable t{"t", {"name", "value"}, {{"a", 0.5}, {"b", 1.5e-5}}};
  EXPECT_EQ(emit(t, Format::Csv), "name,value\na,0.5\nb,1.5e-05\n");
  EXPECT_EQ(std::stod("1.5e-05"), 1.5e-5);
  auto md = emit(t, Format::Markdown);
  EXPECT_NE(md.find("| b | 1.50e-05 |"), std::string::npos) << md;
  auto j = nlohmann::json::parse(emit(t, Format::Json));
  EXPECT_EQ(j["rows"][1]["value"].get<double>(), 1.5e-5);
}

TEST(Config, ParseAndMerge) {
  auto cfg = parse_config("# comment\n\nseed = 7\nformat=json\n");
  EXPECT_EQ(cfg.at("seed"), "7");
  EXPECT_EQ(cfg.at("format"), "json");
  auto args = merge_config_args({"prog", "agreement", "--seed", "3"}, cfg);
  EXPECT_EQ(args, (std::vector<std::string>{"prog", "agreement", "--seed", "3", "--format=json"}));
  auto args2 = merge_config_args({"prog", "--format=csv"}, cfg);
  EXPECT_EQ(args2, (std::vector<std::string>{"prog", "--format=csv", "--seed=7"}));
  EXPECT_THROW(parse_config("novalue\n"), ValidationError);
  EXPECT_THROW(parse_config("=x\n"), ValidationError);
  EXPECT_THROW(parse_config("a=1\na=2\n"), ValidationError);
}

TEST(Serialize, LogisticModelRoundTrip) {
  Eigen::MatrixXd x(6, 2);
  x << 1, 0, 0, 1, 1, 1, 0, 0, 1, 0, 0, 1;
  std::vector<BinaryLabel> y{BinaryLabel::Positive, BinaryLabel::Negative, BinaryLabel::Positive,
                             BinaryLabel::Negative, BinaryLabel::Negative, BinaryLabel::Positive};
  auto m = fit_logistic(x, y, Penalty::l2(1.0), ClassWeighting::InversePrevalence, {}, {"a", "b"});
  auto back = logistic_model_from_json(parse_json_document(to_json_doc(m).dump(), "m"));
  EXPECT_EQ(back.weights, m.weights);
  EXPECT_EQ(back.bias, m.bias);
  EXPECT_EQ(back.feature_names, m.feature_names);
  EXPECT_EQ(back.penalty.kind, m.penalty.kind);
  EXPECT_EQ(back.penalty.c, m.penalty.c);
  EXPECT_EQ(back.weighting, m.weighting);
  EXPECT_EQ(back.fit_report.iterations, m.fit_report.iterations);
  EXPECT_THROW(parse_json_document("{not json", "m"), ValidationError);
  EXPECT_THROW(logistic_model_from_json(nlohmann::json{{"type", "student_model"}}), ValidationError);
}

TEST(Serialize, StudentAndThresholdRoundTrip) {
  Corpus c;
  for (int i = 0; i < 10; ++i) {
    Study s;
    s.id = std::to_string(i);
    s.impression = i % 2 ? "small effusion" : "no effusion";
    Probabilities p;
    p.fill(i % 2 ? 0.8 : 0.2);
    s.probabilities = p;
    c.studies.push_back(s);
  }
  TrainConfig cfg;
  cfg.max_epochs = 5;
  auto r = train_student(c, cfg);
  auto back = student_model_from_json(parse_json_document(to_json_doc(r.model, cfg).dump(), "s"));
  EXPECT_EQ(back.vocabulary.entries(), r.model.vocabulary.entries());
  EXPECT_EQ(back.weights, r.model.weights);
  EXPECT_EQ(back.biases, r.model.biases);
  EXPECT_EQ(predict_student(back, "small effusion"), predict_student(r.model, "small effusion"));

  ThresholdSet t;
  t.set(Condition::Edema, 0.3125);
  auto tb = threshold_set_from_json(to_json_doc(t));
  EXPECT_EQ(tb.get(Condition::Edema), 0.3125);
  EXPECT_FALSE(tb.get(Condition::Fracture).has_value());
  nlohmann::json bad = to_json_doc(t);
  bad["thresholds"]["Edema"] = 1.5;
  EXPECT_THROW(threshold_set_from_json(bad), ValidationError);
}
