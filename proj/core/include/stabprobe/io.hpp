#pragma once

#include "stabprobe/experiments.hpp"
#include "stabprobe/probe.hpp"
#include "stabprobe/signal.hpp"
#include "stabprobe/stats.hpp"

#include <string>

namespace stabprobe {

// %.17g: enough digits to round-trip a double exactly.
std::string format_double(double v);

// Flat key-value serialization of a Jacobian report, one `key=value` line
// per field, singular values as a comma list.
std::string serialize_report(const JacobianReport& report);

// header: param,probe_mean,probe_std,api_mean,api_std,trials,T
// API columns stay empty when no API was recorded.  `param_is_int` prints
// the parameter column without a decimal expansion (lag counts).
std::string sweep_csv(const GridResult& g, long samples, bool param_is_int);

// header: p,<col_name>,probe_mean,probe_std
std::string tradeoff_csv(const GridResult& g, const std::string& col_name);

// header: p,frontier  (empty field when the level is never reached)
std::string frontier_csv(const GridResult& g);

// header: p,<col_name>,in_band  with 0/1 entries
std::string isoband_csv(const GridResult& g, const std::string& col_name);

// header: param,trial,probe,api,ms
std::string records_csv(const GridResult& g);

// header: t,ch1,...,chn
std::string signal_csv(const SignalBlock& block);

std::string matrix_csv(const Mat& m);

void write_file(const std::string& path, const std::string& content);

// One CSV per constraint matrix, named {family}_{tag}.csv inside dir.
void dump_constraints(const std::string& dir, const ConstraintSet& set);

}  // namespace stabprobe
