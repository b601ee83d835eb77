#include "amest/cli/csv_log.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace amest::cli {
namespace {

void add_block(std::vector<std::string>& cols, const std::string& prefix, int n) {
  for (int i = 0; i < n; ++i) cols.push_back(prefix + std::to_string(i));
}

std::vector<std::string> make_columns() {
  std::vector<std::string> c{"t"};
  add_block(c, "q", kDof);
  add_block(c, "qd", kDof);
  add_block(c, "qhat", kDof);
  c.insert(c.end(), {"m2hat", "m3hat", "m4hat"});
  add_block(c, "tau", kDof);
  add_block(c, "ec", kDof);
  c.insert(c.end(), {"V1", "V2", "phi_d", "theta_d"});
  return c;
}

template <typename Vec>
void append(std::string& line, const Vec& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    line += ',';
    line += csv_number(v(i));
  }
}

double parse_cell(const std::string& cell, std::size_t row) {
  double v = 0.0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
    throw std::runtime_error("csv row " + std::to_string(row) + ": cannot parse '" + cell + "'");
  }
  return v;
}

}  // namespace

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> columns = make_columns();
  return columns;
}

std::string csv_number(double v) {
  char buf[48];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific, 14);
  return std::string(buf, res.ptr);
}

void write_csv(std::ostream& out, const SimLog& log) {
  const auto& cols = csv_columns();
  std::string header;
  for (std::size_t i = 0; i < cols.size(); ++i) header += (i ? "," : "") + cols[i];
  out << header << '\n';
  std::string line;
  for (const LogRow& r : log.rows) {
    line = csv_number(r.t);
    append(line, r.q);
    append(line, r.qd);
    append(line, r.q_hat);
    append(line, r.m_hat);
    append(line, r.tau);
    append(line, r.e_c);
    append(line, Eigen::Vector4d(r.V1, r.V2, r.phi_d, r.theta_d));
    out << line << '\n';
  }
}

std::string csv_text(const SimLog& log) {
  std::ostringstream out;
  write_csv(out, log);
  return out.str();
}

SimLog read_csv(std::istream& in) {
  const auto& cols = csv_columns();
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: missing header");
  {
    std::stringstream hs(line);
    std::string name;
    std::size_t i = 0;
    while (std::getline(hs, name, ',')) {
      if (i >= cols.size() || name != cols[i]) throw std::runtime_error("csv: unexpected header column '" + name + "'");
      ++i;
    }
    if (i != cols.size()) throw std::runtime_error("csv: header has " + std::to_string(i) + " columns");
  }

  SimLog log;
  std::vector<double> v;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    v.clear();
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) v.push_back(parse_cell(cell, row));
    if (v.size() != cols.size()) {
      throw std::runtime_error("csv row " + std::to_string(row) + ": expected " + std::to_string(cols.size()) +
                               " values, got " + std::to_string(v.size()));
    }
    LogRow r;
    std::size_t k = 0;
    auto take = [&](auto& vec) {
      for (Eigen::Index i = 0; i < vec.size(); ++i) vec(i) = v[k++];
    };
    r.t = v[k++];
    take(r.q);
    take(r.qd);
    take(r.q_hat);
    take(r.m_hat);
    take(r.tau);
    take(r.e_c);
    r.V1 = v[k++];
    r.V2 = v[k++];
    r.phi_d = v[k++];
    r.theta_d = v[k++];
    log.rows.push_back(r);
  }
  return log;
}

}  // namespace amest::cli
