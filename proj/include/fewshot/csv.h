#ifndef FEWSHOT_CSV_H_
#define FEWSHOT_CSV_H_

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace fewshot {

using CsvRecord = std::vector<std::string>;

// Reads RFC-4180 CSV: comma separated, double-quote quoting with "" escapes,
// CRLF or LF record terminators. A leading UTF-8 byte-order mark is dropped.
// Blank lines are skipped. Throws SchemaError on an unterminated quote.
std::vector<CsvRecord> read_csv(std::istream& in);

// Writes one record, quoting only fields that need it. Terminates with LF.
void write_csv_record(std::ostream& out, std::span<const std::string> fields);

}  // namespace fewshot

#endif  // FEWSHOT_CSV_H_
