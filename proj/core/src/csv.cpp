#include "adaptrt/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace adaptrt {

namespace {

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string context_field(const Context& c) {
  switch (c.kind) {
    case Context::Kind::Empty:
      return "";
    case Context::Kind::State:
      return std::to_string(c.state);
    case Context::Kind::Vector: {
      std::string out;
      for (std::size_t i = 0; i < c.vec.size(); ++i) {
        if (i) out += ';';
        out += format_real(c.vec[i]);
      }
      return out;
    }
  }
  return "";
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

bool is_integer_token(const std::string& s) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i)
    if (s[i] < '0' || s[i] > '9') return false;
  return true;
}

Context parse_context(const std::string& field, int line_no) {
  if (field.empty()) return Context::empty();
  if (field.find(';') == std::string::npos && is_integer_token(field))
    return Context::of_state(std::stoi(field));
  std::vector<double> v;
  for (const auto& tok : split(field, ';')) {
    try {
      v.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw ArgumentError("dataset csv line " + std::to_string(line_no) +
                          ": bad context component '" + tok + "'");
    }
  }
  return Context::of_vector(std::move(v));
}

}  // namespace

void write_dataset_csv(const Dataset& d, std::ostream& os) {
  os << "t,context,action,response\n";
  for (int t = 0; t < d.length(); ++t) {
    const Triple& z = d.at(t);
    os << (t + 1) << ',' << context_field(z.context) << ',' << z.action << ',';
    if (z.response.kind == Response::Kind::Real)
      os << format_real(z.response.value);
    else
      os << z.response.state;
    os << '\n';
  }
  if (d.is_mdp()) {
    os << (d.length() + 1) << ','
       << d.at(d.length() - 1).response.state << ','
       << d.trailing_action() << ",\n";
  }
}

void write_dataset_csv_file(const Dataset& d, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ArgumentError("cannot open for writing: " + path);
  write_dataset_csv(d, os);
}

Dataset read_dataset_csv(std::istream& is) {
  std::string line;
  int line_no = 0;
  bool saw_header = false;
  struct Row {
    Context context;
    ActionId action;
    std::string response;  // raw; interpretation depends on trailing row
  };
  std::vector<Row> rows;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!saw_header) {
      saw_header = true;
      if (line.rfind("t,", 0) == 0) continue;  // header row
    }
    auto fields = split(line, ',');
    if (fields.size() != 4)
      throw ArgumentError("dataset csv line " + std::to_string(line_no) +
                          ": expected 4 columns");
    Row r;
    r.context = parse_context(fields[1], line_no);
    try {
      r.action = std::stoi(fields[2]);
    } catch (const std::exception&) {
      throw ArgumentError("dataset csv line " + std::to_string(line_no) +
                          ": bad action '" + fields[2] + "'");
    }
    r.response = fields[3];
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw ArgumentError("dataset csv: no data rows");

  const bool mdp = rows.back().response.empty();
  if (mdp && rows.size() < 2)
    throw ArgumentError("dataset csv: trailing-action row without data rows");

  const std::size_t t_count = mdp ? rows.size() - 1 : rows.size();
  std::vector<Triple> triples;
  triples.reserve(t_count);
  for (std::size_t t = 0; t < t_count; ++t) {
    Triple z;
    z.context = rows[t].context;
    z.action = rows[t].action;
    const std::string& resp = rows[t].response;
    if (resp.empty())
      throw ArgumentError("dataset csv: empty response in data row " +
                          std::to_string(t + 1));
    if (mdp) {
      if (!is_integer_token(resp))
        throw ArgumentError("dataset csv: MDP response must be a state id");
      z.response = Response::of_state(std::stoi(resp));
    } else {
      z.response = Response::of_real(std::stod(resp));
    }
    triples.push_back(std::move(z));
  }
  if (!mdp) return Dataset::bandit(std::move(triples));

  const Row& tail = rows.back();
  if (tail.context.kind == Context::Kind::State &&
      tail.context.state != triples.back().response.state)
    throw ArgumentError("dataset csv: trailing row state disagrees with Y_T");
  return Dataset::mdp(std::move(triples), tail.action);
}

Dataset read_dataset_csv_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ArgumentError("cannot open dataset: " + path);
  return read_dataset_csv(is);
}

}  // namespace adaptrt
