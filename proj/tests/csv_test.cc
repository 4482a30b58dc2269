#include "fewshot/csv.h"

#include <gtest/gtest.h>

#include <sstream>

#include "fewshot/errors.h"

namespace fewshot {
namespace {

std::vector<CsvRecord> parse(const std::string& text) {
  std::istringstream in(text);
  return read_csv(in);
}

TEST(CsvTest, QuotedFieldsWithCommasQuotesAndNewlines) {
  const auto rows = parse("a,b\n\"x,y\",\"say \"\"hi\"\"\"\n\"multi\nline\",z\n");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1][0], "x,y");
  EXPECT_EQ(rows[1][1], "say \"hi\"");
  EXPECT_EQ(rows[2][0], "multi\nline");
}

TEST(CsvTest, CrLfBomAndBlankLines) {
  const auto rows = parse("\xEF\xBB\xBFID,Text\r\n1,a\r\n\r\n2,\r\n");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0][0], "ID");
  EXPECT_EQ(rows[2], (CsvRecord{"2", ""}));
}

TEST(CsvTest, MissingFinalNewline) {
  const auto rows = parse("a,b\n1,2");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1], (CsvRecord{"1", "2"}));
}

TEST(CsvTest, UnterminatedQuoteIsAnError) {
  EXPECT_THROW(parse("a\n\"open\n"), SchemaError);
}

TEST(CsvTest, WriterQuotesOnlyWhenNeeded) {
  std::ostringstream out;
  const std::vector<std::string> fields = {"plain", "a,b", "q\"q", "نص"};
  write_csv_record(out, fields);
  EXPECT_EQ(out.str(), "plain,\"a,b\",\"q\"\"q\",نص\n");
  EXPECT_EQ(parse(out.str())[0], fields);
}

}  // namespace
}  // namespace fewshot
