#pragma once

#include "fitzcert/oracle.hpp"
#include "fitzcert/runner.hpp"

#include <ostream>
#include <string>

namespace fitzcert {

/// One JSON object per record, keys in fixed order; non-finite numbers are
/// written as the strings "inf", "-inf" and "nan".
std::string record_json(const CertificateRecord& r);

/// Header line, one line per record, then a summary line (the only line
/// carrying wall time).
void write_jsonl(std::ostream& out, const Report& report);

/// kind,T,B,p,lambda,count,min_slack,passes,fails
void write_csv(std::ostream& out, const Report& report);

void write_oracle_jsonl(std::ostream& out, const OracleReport& report);

} // namespace fitzcert
