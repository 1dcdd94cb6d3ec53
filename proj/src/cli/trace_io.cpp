#include <sstream>

#include "omr/cli.hpp"

namespace omr::cli {

namespace {

constexpr const char* kHeader = "round,buyer_index,context,price,bid,true_value,sold,omega,xi,expert_id";

long long parse_int(const std::string& s) {
  std::size_t used = 0;
  long long v = std::stoll(s, &used);
  if (used != s.size()) throw std::invalid_argument("not an integer: '" + s + "'");
  return v;
}

}  // namespace

std::vector<TraceRow> trace_rows(const RunResult& run) {
  std::vector<TraceRow> rows;
  rows.reserve(run.rounds.size());
  for (const auto& r : run.rounds)
    rows.push_back({r.round, r.buyer, r.context.coords(), r.price, r.bid.value(), r.value.value(), r.sold,
                    r.omega, r.xi, r.expert});
  return rows;
}

std::string emit_trace(const std::vector<TraceRow>& rows) {
  std::string out = kHeader;
  out += '\n';
  for (const auto& r : rows) {
    out += std::to_string(r.round) + ',' + std::to_string(r.buyer_index) + ',';
    for (std::size_t i = 0; i < r.context.size(); ++i) out += (i ? ";" : "") + format_double(r.context[i]);
    out += ',' + format_double(r.price) + ',' + format_double(r.bid) + ',' + format_double(r.true_value) +
           ',' + (r.sold ? "1" : "0") + ',' + std::to_string(r.omega) + ',' + std::to_string(r.xi) + ',' +
           std::to_string(r.expert_id) + '\n';
  }
  return out;
}

std::vector<TraceRow> parse_trace(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kHeader) throw std::invalid_argument("trace: bad header");
  std::vector<TraceRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 10) throw std::invalid_argument("trace: expected 10 columns");
    TraceRow r;
    r.round = static_cast<std::size_t>(parse_int(cells[0]));
    r.buyer_index = static_cast<int>(parse_int(cells[1]));
    std::istringstream cs(cells[2]);
    while (std::getline(cs, cell, ';')) r.context.push_back(parse_double(cell));
    r.price = parse_double(cells[3]);
    r.bid = parse_double(cells[4]);
    r.true_value = parse_double(cells[5]);
    r.sold = parse_int(cells[6]) != 0;
    r.omega = static_cast<int>(parse_int(cells[7]));
    r.xi = static_cast<int>(parse_int(cells[8]));
    r.expert_id = parse_int(cells[9]);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace omr::cli
