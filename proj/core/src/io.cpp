#include "stabprobe/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace stabprobe {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string serialize_report(const JacobianReport& report) {
  std::ostringstream os;
  os << "rows=" << report.rows << "\n";
  os << "cols=" << report.cols << "\n";
  os << "probe=" << format_double(report.probe) << "\n";
  os << "kernel_dim=" << report.kernel_dim << "\n";
  os << "sv=";
  for (std::size_t i = 0; i < report.singular_values.size(); ++i) {
    if (i > 0) {
      os << ",";
    }
    os << format_double(report.singular_values[i]);
  }
  os << "\n";
  os << "tol=" << format_double(report.tol) << "\n";
  return os.str();
}

namespace {

std::string param_text(double v, bool as_int) {
  if (as_int) {
    return std::to_string(static_cast<long>(v));
  }
  return format_double(v);
}

}  // namespace

std::string sweep_csv(const GridResult& g, long samples, bool param_is_int) {
  std::ostringstream os;
  os << "param,probe_mean,probe_std,api_mean,api_std,trials,T\n";
  for (std::size_t c = 0; c < g.cols(); ++c) {
    const GridCell& cell = g.cell(0, c);
    os << param_text(g.col_values[c], param_is_int) << ",";
    os << format_double(cell.probe_mean) << "," << format_double(cell.probe_std) << ",";
    if (cell.api_mean) {
      os << format_double(*cell.api_mean) << "," << format_double(*cell.api_std);
    } else {
      os << ",";
    }
    os << "," << cell.trials << "," << samples << "\n";
  }
  return os.str();
}

std::string tradeoff_csv(const GridResult& g, const std::string& col_name) {
  std::ostringstream os;
  os << "p," << col_name << ",probe_mean,probe_std\n";
  for (std::size_t r = 0; r < g.rows(); ++r) {
    for (std::size_t c = 0; c < g.cols(); ++c) {
      const GridCell& cell = g.cell(r, c);
      os << format_double(g.row_values[r]) << ","
         << param_text(g.col_values[c], true) << ","
         << format_double(cell.probe_mean) << "," << format_double(cell.probe_std) << "\n";
    }
  }
  return os.str();
}

std::string frontier_csv(const GridResult& g) {
  std::ostringstream os;
  os << "p,frontier\n";
  for (std::size_t r = 0; r < g.rows(); ++r) {
    os << format_double(g.row_values[r]) << ",";
    if (r < g.frontier.size() && g.frontier[r]) {
      os << *g.frontier[r];
    }
    os << "\n";
  }
  return os.str();
}

std::string isoband_csv(const GridResult& g, const std::string& col_name) {
  std::ostringstream os;
  os << "p," << col_name << ",in_band\n";
  for (std::size_t r = 0; r < g.rows(); ++r) {
    for (std::size_t c = 0; c < g.cols(); ++c) {
      os << format_double(g.row_values[r]) << ","
         << param_text(g.col_values[c], true) << ","
         << (g.iso_band[r * g.cols() + c] ? 1 : 0) << "\n";
    }
  }
  return os.str();
}

std::string records_csv(const GridResult& g) {
  std::ostringstream os;
  os << "param,trial,probe,api,ms\n";
  for (const TrialRecord& rec : g.records) {
    os << rec.param << "," << rec.trial << "," << format_double(rec.probe) << ",";
    if (rec.api) {
      os << format_double(*rec.api);
    }
    os << "," << format_double(rec.ms) << "\n";
  }
  return os.str();
}

std::string signal_csv(const SignalBlock& block) {
  std::ostringstream os;
  os << "t";
  for (int ch = 1; ch <= block.channels(); ++ch) {
    os << ",ch" << ch;
  }
  os << "\n";
  for (long t = 0; t < block.length(); ++t) {
    os << t;
    for (int ch = 0; ch < block.channels(); ++ch) {
      os << "," << format_double(block.samples(t, ch));
    }
    os << "\n";
  }
  return os.str();
}

std::string matrix_csv(const Mat& m) {
  std::ostringstream os;
  for (long i = 0; i < m.rows(); ++i) {
    for (long j = 0; j < m.cols(); ++j) {
      if (j > 0) {
        os << ",";
      }
      os << format_double(m(i, j));
    }
    os << "\n";
  }
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path);
  }
  out << content;
  if (!out) {
    throw std::runtime_error("write failed: " + path);
  }
}

void dump_constraints(const std::string& dir, const ConstraintSet& set) {
  std::filesystem::create_directories(dir);
  const std::string family = set.family == ConstraintFamily::hos ? "hos" : "sos";
  for (int i = 0; i < set.size(); ++i) {
    const std::string name = family + "_" + set.meta[i].label() + ".csv";
    write_file((std::filesystem::path(dir) / name).string(), matrix_csv(set.matrices[i]));
  }
}

}  // namespace stabprobe
