#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "symcap/errors.hpp"
#include "symcap/solver.hpp"

namespace symcap {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Next line that is not a comment, with SDPA punctuation turned into spaces.
bool next_data_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '"' || line[first] == '*') continue;
    for (char& ch : line)
      if (ch == '{' || ch == '}' || ch == '(' || ch == ')' || ch == ',') ch = ' ';
    return true;
  }
  return false;
}

}  // namespace

void write_sdpa(const StandardFormSDP& sdp, std::ostream& out) {
  sdp.check();
  out << "\"symcap SDPA sparse export: minimize c^T x s.t. sum_i x_i F_i - F_0 psd\n";
  out << sdp.num_vars() << "\n" << sdp.block_sizes.size() << "\n";
  for (std::size_t b = 0; b < sdp.block_sizes.size(); ++b) out << (b ? " " : "") << sdp.block_sizes[b];
  out << "\n";
  for (std::size_t i = 0; i < sdp.c.size(); ++i) out << (i ? " " : "") << fmt17(sdp.c[i]);
  out << "\n";
  for (std::size_t m = 0; m < sdp.F.size(); ++m)
    for (const auto& e : sdp.F[m]) {
      if (e.value == 0.0) continue;
      int r = std::min(e.row, e.col), c = std::max(e.row, e.col);
      out << m << " " << e.block + 1 << " " << r + 1 << " " << c + 1 << " " << fmt17(e.value) << "\n";
    }
}

StandardFormSDP read_sdpa(std::istream& in) {
  std::string line;
  StandardFormSDP sdp;
  long m = 0, nblocks = 0;
  if (!next_data_line(in, line) || !(std::istringstream(line) >> m) || m < 0)
    throw ParseError("SDPA: missing number of constraint matrices");
  if (!next_data_line(in, line) || !(std::istringstream(line) >> nblocks) || nblocks <= 0)
    throw ParseError("SDPA: missing number of blocks");
  // Block sizes and c may spill over several lines.
  std::vector<double> nums;
  auto gather = [&](std::size_t want, const char* what) {
    nums.clear();
    while (nums.size() < want) {
      if (!next_data_line(in, line)) throw ParseError(std::string("SDPA: truncated ") + what);
      std::istringstream ss(line);
      double v;
      while (nums.size() < want && ss >> v) nums.push_back(v);
    }
  };
  gather(static_cast<std::size_t>(nblocks), "block structure");
  for (double v : nums) sdp.block_sizes.push_back(static_cast<int>(v));
  gather(static_cast<std::size_t>(m), "objective vector");
  sdp.c = nums;
  sdp.F.assign(static_cast<std::size_t>(m) + 1, {});
  while (next_data_line(in, line)) {
    std::istringstream ss(line);
    long mat, blk, i, j;
    double v;
    if (!(ss >> mat >> blk >> i >> j >> v)) throw ParseError("SDPA: malformed entry line: " + line);
    if (mat < 0 || mat > m || blk < 1 || blk > nblocks) throw ParseError("SDPA: entry index out of range: " + line);
    sdp.F[mat].push_back({static_cast<int>(blk - 1), static_cast<int>(i - 1), static_cast<int>(j - 1), v});
  }
  sdp.check();
  return sdp;
}

void write_sdpa_file(const StandardFormSDP& sdp, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_sdpa(sdp, out);
}

StandardFormSDP read_sdpa_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return read_sdpa(in);
}

}  // namespace symcap
