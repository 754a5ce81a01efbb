#pragma once

// CSV and JSON interchange: path CSV (t,bid,ask[,S]), strategy CSV (t,phi),
// almost simple strategy JSON, cost and game reports. Floats in CSV use 17
// significant digits; JSON numbers are shortest-round-trip.

#include <iosfwd>
#include <string>

#include "spreadlab/cost.hpp"
#include "spreadlab/dynkin.hpp"
#include "spreadlab/market.hpp"

namespace spreadlab {

inline constexpr const char* kToolName = "spreadlab";
inline constexpr const char* kToolVersion = "0.1.0";

std::string format_double(double x);  // %.17g

void write_path_csv(const BidAskPath& path, std::ostream& out);
// zero_eps > 0 snaps spreads <= zero_eps to exact zeros (ask := bid); this
// tolerance lives only in the ingestion layer.
BidAskPath read_path_csv(std::istream& in, double zero_eps = 0.0);

void write_strategy_csv(const StrategyPath& phi, const BidAskPath& path, std::ostream& out);
StrategyPath read_strategy_csv(std::istream& in);

std::string almost_simple_to_json(const AlmostSimpleStrategy& phi, const BidAskPath& path);
AlmostSimpleStrategy almost_simple_from_json(const std::string& text, const BidAskPath& path);

std::string cost_report_json(const CostProcess& cost, const BidAskPath& path);

std::string read_text_file(const std::string& file);
void write_text_file(const std::string& file, const std::string& text);

}  // namespace spreadlab
