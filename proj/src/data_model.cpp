#include "wass/data_model.hpp"

#include "wass/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace wass {

namespace {

constexpr char kMagic[4] = {'W', 'S', 'F', '1'};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::IoError, "write failed for " + path.string());
}

std::uint32_t read_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void append_u32_le(std::string& out, std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) out.push_back(static_cast<char>((v >> s) & 0xffu));
}

float read_f32_le(const unsigned char* p) {
  std::uint32_t bits = read_u32_le(p);
  return std::bit_cast<float>(bits);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  // A trailing newline does not introduce a record.
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

double parse_double(std::string_view field, std::size_t row, std::size_t col) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    fail(ErrorKind::MalformedFile, "row " + std::to_string(row) + ", column " +
                                       std::to_string(col) + ": not a number '" +
                                       std::string(field) + "'");
  }
  return value;
}

Matrix parse_csv_matrix(const std::string& text) {
  auto lines = split_lines(text);
  if (lines.empty()) fail(ErrorKind::MalformedFile, "empty matrix file");
  std::vector<std::vector<double>> rows;
  rows.reserve(lines.size());
  for (std::size_t r = 0; r < lines.size(); ++r) {
    std::string_view line = trim(lines[r]);
    if (line.empty()) fail(ErrorKind::MalformedFile, "blank line at row " + std::to_string(r));
    std::vector<double> values;
    std::size_t start = 0;
    while (true) {
      std::size_t comma = line.find(',', start);
      std::string_view field =
          line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
      values.push_back(parse_double(field, r, values.size()));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && values.size() != rows.front().size()) {
      fail(ErrorKind::MalformedFile, "row " + std::to_string(r) + " has " +
                                         std::to_string(values.size()) + " columns, expected " +
                                         std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(values));
  }
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return m;
}

Matrix parse_binary_matrix(const std::string& bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    fail(ErrorKind::MalformedFile, "missing WSF1 header");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  std::uint32_t rows = read_u32_le(p + 4);
  std::uint32_t cols = read_u32_le(p + 8);
  std::uint64_t count = static_cast<std::uint64_t>(rows) * cols;
  if (rows == 0 || cols == 0) fail(ErrorKind::MalformedFile, "zero-sized matrix");
  if (bytes.size() != 12 + count * 4)
    fail(ErrorKind::MalformedFile, "payload size does not match " + std::to_string(rows) + "x" +
                                       std::to_string(cols));
  Matrix m(rows, cols);
  for (std::uint32_t r = 0; r < rows; ++r)
    for (std::uint32_t c = 0; c < cols; ++c)
      m(r, c) = static_cast<double>(read_f32_le(p + 12 + 4 * (static_cast<std::uint64_t>(r) * cols + c)));
  return m;
}

void check_finite(const Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      if (!std::isfinite(m(r, c)))
        fail(ErrorKind::NonFiniteValue,
             "row " + std::to_string(r) + ", column " + std::to_string(c));
}

MatrixFormat detect(const std::string& bytes, MatrixFormat format) {
  if (format != MatrixFormat::Auto) return format;
  return bytes.size() >= 4 && std::memcmp(bytes.data(), kMagic, 4) == 0 ? MatrixFormat::Binary
                                                                           : MatrixFormat::Csv;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

}  // namespace

// FeatureMatrix ------------------------------------------------------------

FeatureMatrix::FeatureMatrix(Matrix values) : values_(std::move(values)) {
  if (values_.rows() < 1 || values_.cols() < 1)
    fail(ErrorKind::InvalidArgument, "feature matrix must have at least one row and column");
  check_finite(values_);
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> indices) const {
  Matrix out(static_cast<Eigen::Index>(indices.size()), values_.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= rows()) fail(ErrorKind::InvalidArgument, "row index out of range");
    out.row(static_cast<Eigen::Index>(i)) = values_.row(static_cast<Eigen::Index>(indices[i]));
  }
  return FeatureMatrix(std::move(out));
}

// Labels -------------------------------------------------------------------

LabelSet densify_labels(std::span<const ClassId> raw) {
  LabelSet out;
  out.labels.reserve(raw.size());
  std::unordered_map<ClassId, int> index;
  for (ClassId id : raw) {
    auto [it, inserted] = index.try_emplace(id, static_cast<int>(out.class_ids.size()));
    if (inserted) out.class_ids.push_back(id);
    out.labels.push_back(it->second);
  }
  return out;
}

LabelSet parse_labels(const std::string& text) {
  auto lines = split_lines(text);
  if (lines.empty()) fail(ErrorKind::EmptyFile, "label file has no entries");
  std::vector<ClassId> raw;
  raw.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = trim(lines[i]);
    ClassId v = 0;
    auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
    if (line.empty() || ec != std::errc() || ptr != line.data() + line.size() || v < 0) {
      fail(ErrorKind::MalformedFile,
           "line " + std::to_string(i + 1) + ": expected a nonnegative integer, got '" +
               std::string(line) + "'");
    }
    raw.push_back(v);
  }
  return densify_labels(raw);
}

LabelSet load_labels(const std::filesystem::path& path) { return parse_labels(read_file(path)); }

void save_labels(std::span<const ClassId> labels, const std::filesystem::path& path) {
  std::string out;
  for (ClassId id : labels) {
    out += std::to_string(id);
    out.push_back('\n');
  }
  write_file(path, out);
}

// LabeledDataset -----------------------------------------------------------

LabeledDataset::LabeledDataset(FeatureMatrix features, LabelSet labels)
    : features_(std::move(features)), labels_(std::move(labels)) {
  if (labels_.labels.size() != features_.rows())
    fail(ErrorKind::DimensionMismatch, "label count " + std::to_string(labels_.labels.size()) +
                                           " != feature rows " + std::to_string(features_.rows()));
  counts_.assign(labels_.class_ids.size(), 0);
  for (int y : labels_.labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= counts_.size())
      fail(ErrorKind::InvalidArgument, "label outside [0, k)");
    ++counts_[static_cast<std::size_t>(y)];
  }
  for (std::size_t i = 0; i < counts_.size(); ++i)
    if (counts_[i] == 0)
      fail(ErrorKind::InvalidArgument, "class " + std::to_string(labels_.class_ids[i]) + " is empty");
}

std::vector<ClassId> LabeledDataset::original_labels() const {
  std::vector<ClassId> out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = original_label(i);
  return out;
}

LabeledDataset LabeledDataset::select_rows(std::span<const std::size_t> indices) const {
  std::vector<ClassId> raw(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= size()) fail(ErrorKind::InvalidArgument, "row index out of range");
    raw[i] = original_label(indices[i]);
  }
  return LabeledDataset(features_.select_rows(indices), densify_labels(raw));
}

LabeledDataset load_dataset(const std::filesystem::path& features,
                            const std::filesystem::path& labels, MatrixFormat format) {
  return LabeledDataset(load_feature_matrix(features, format), load_labels(labels));
}

// ClassWeights -------------------------------------------------------------

ClassWeights::ClassWeights(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) fail(ErrorKind::InvalidArgument, "class weights must be non-empty");
  double sum = 0.0;
  for (double w : weights_) {
    if (!std::isfinite(w) || w < -kWeightClampTolerance)
      fail(ErrorKind::InvalidArgument, "class weight outside the simplex");
    sum += w;
  }
  if (std::abs(sum - 1.0) > kSimplexSumTolerance)
    fail(ErrorKind::InvalidArgument, "class weights sum to " + format_double(sum));
}

ClassWeights ClassWeights::uniform(std::size_t k) {
  if (k == 0) fail(ErrorKind::InvalidArgument, "uniform weights need k >= 1");
  return ClassWeights(std::vector<double>(k, 1.0 / static_cast<double>(k)));
}

ClassWeights ClassWeights::clamped() const {
  std::vector<double> out(weights_);
  for (double& w : out)
    if (w < kWeightClampTolerance) w = 0.0;
  double sum = std::accumulate(out.begin(), out.end(), 0.0);
  for (double& w : out) w /= sum;
  return ClassWeights(std::move(out));
}

std::vector<std::size_t> ClassWeights::support(double threshold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < weights_.size(); ++i)
    if (weights_[i] > threshold) out.push_back(i);
  return out;
}

std::string class_weights_json(const ClassWeights& w, std::span<const ClassId> class_ids) {
  if (class_ids.size() != w.size())
    fail(ErrorKind::DimensionMismatch, "class-id mapping does not match the weight vector");
  ClassWeights c = w.clamped();
  nlohmann::ordered_json doc;
  doc["k"] = c.size();
  nlohmann::ordered_json weights = nlohmann::ordered_json::object();
  nlohmann::ordered_json support = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < c.size(); ++i) {
    weights[std::to_string(class_ids[i])] = c[i];
    if (c[i] > 0.0) support.push_back(class_ids[i]);
  }
  doc["weights"] = std::move(weights);
  doc["support"] = std::move(support);
  return doc.dump(2);
}

void save_class_weights(const ClassWeights& w, std::span<const ClassId> class_ids,
                        const std::filesystem::path& path) {
  write_file(path, class_weights_json(w, class_ids) + "\n");
}

// TransportPlan ------------------------------------------------------------

PlanDiagnostics diagnose_plan(const TransportPlan& p, const Matrix& cost) {
  if (cost.rows() != p.plan.rows() || cost.cols() != p.plan.cols())
    fail(ErrorKind::DimensionMismatch, "plan and cost shapes differ");
  PlanDiagnostics d;
  d.min_entry = p.plan.minCoeff();
  d.row_violation = (p.plan.rowwise().sum() - p.source_marginal).cwiseAbs().maxCoeff();
  d.col_violation = (p.plan.colwise().sum().transpose() - p.target_marginal).cwiseAbs().maxCoeff();
  double recomputed = p.plan.cwiseProduct(cost).sum();
  d.objective_rel_error = std::abs(recomputed - p.objective) / std::max(1.0, std::abs(recomputed));
  return d;
}

// DiscreteJointDistribution -------------------------------------------------

DiscreteJointDistribution::DiscreteJointDistribution(std::vector<JointAtom> atoms)
    : atoms_(std::move(atoms)) {
  if (atoms_.empty()) fail(ErrorKind::InvalidArgument, "joint distribution needs atoms");
  double sum = 0.0;
  auto dim = atoms_.front().feature.size();
  for (const auto& a : atoms_) {
    if (a.feature.size() != dim || dim == 0)
      fail(ErrorKind::DimensionMismatch, "joint atoms disagree on feature dimension");
    if (!std::isfinite(a.mass) || a.mass < 0.0)
      fail(ErrorKind::InvalidArgument, "joint atom mass must be a nonnegative number");
    if (!a.feature.allFinite()) fail(ErrorKind::NonFiniteValue, "joint atom feature");
    sum += a.mass;
  }
  if (std::abs(sum - 1.0) > kSimplexSumTolerance)
    fail(ErrorKind::InvalidArgument, "joint masses sum to " + format_double(sum));
}

DiscreteJointDistribution DiscreteJointDistribution::from_dataset(const LabeledDataset& data) {
  std::vector<double> masses(data.size(), 1.0 / static_cast<double>(data.size()));
  return from_dataset(data, masses);
}

DiscreteJointDistribution DiscreteJointDistribution::from_dataset(const LabeledDataset& data,
                                                                  std::span<const double> masses) {
  if (masses.size() != data.size())
    fail(ErrorKind::DimensionMismatch, "mass vector does not match dataset rows");
  std::vector<JointAtom> atoms;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (masses[i] <= 0.0) continue;
    atoms.push_back({data.features().row(i).transpose(), data.original_label(i), masses[i]});
  }
  return DiscreteJointDistribution(std::move(atoms));
}

// Matrix files ---------------------------------------------------------------

MatrixFormat parse_matrix_format(const std::string& name) {
  if (name == "binary" || name == "wsf") return MatrixFormat::Binary;
  if (name == "csv") return MatrixFormat::Csv;
  if (name == "auto" || name.empty()) return MatrixFormat::Auto;
  fail(ErrorKind::InvalidArgument, "unknown matrix format '" + name + "'");
}

Matrix load_matrix(const std::filesystem::path& path, MatrixFormat format) {
  std::string bytes = read_file(path);
  Matrix m = detect(bytes, format) == MatrixFormat::Binary ? parse_binary_matrix(bytes)
                                                           : parse_csv_matrix(bytes);
  check_finite(m);
  return m;
}

FeatureMatrix parse_feature_csv(const std::string& text) {
  return FeatureMatrix(parse_csv_matrix(text));
}

FeatureMatrix load_feature_matrix(const std::filesystem::path& path, MatrixFormat format) {
  return FeatureMatrix(load_matrix(path, format));
}

void save_matrix(const Matrix& m, const std::filesystem::path& path, MatrixFormat format) {
  std::string out;
  if (format == MatrixFormat::Csv) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        if (c) out.push_back(',');
        out += format_double(m(r, c));
      }
      out.push_back('\n');
    }
  } else {
    out.append(kMagic, 4);
    append_u32_le(out, static_cast<std::uint32_t>(m.rows()));
    append_u32_le(out, static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        append_u32_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(m(r, c))));
  }
  write_file(path, out);
}

void save_feature_matrix(const FeatureMatrix& m, const std::filesystem::path& path,
                         MatrixFormat format) {
  save_matrix(m.values(), path, format == MatrixFormat::Auto ? MatrixFormat::Binary : format);
}

Vector load_vector(const std::filesystem::path& path) {
  Matrix m = load_matrix(path, MatrixFormat::Csv);
  if (m.rows() != 1 && m.cols() != 1)
    fail(ErrorKind::MalformedFile, path.string() + " is not a vector");
  return Eigen::Map<const Vector>(m.data(), m.size());
}

}  // namespace wass
