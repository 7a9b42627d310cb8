#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "creditbench/csv.hpp"
#include "creditbench/errors.hpp"

using namespace creditbench;

TEST(Csv, QuotedFieldsAndLineEndings) {
  std::istringstream in("a,b,c\r\n1,\"x,y\",\"he said \"\"hi\"\"\"\r\n2,\"two\nlines\",\n");
  const auto t = read_csv(in);
  ASSERT_EQ(t.header, (std::vector<std::string>{"a", "b", "c"}));
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0][1], "x,y");
  EXPECT_EQ(t.rows[0][2], "he said \"hi\"");
  EXPECT_EQ(t.rows[1][1], "two\nlines");
  EXPECT_EQ(t.rows[1][2], "");
  EXPECT_EQ(t.column("b"), 1);
  EXPECT_EQ(t.column("zzz"), -1);
}

TEST(Csv, RaggedRowNamesRecord) {
  std::istringstream in("a,b\n1,2\n3\n");
  try {
    read_csv(in);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("3"), std::string::npos) << e.what();
  }
}

TEST(Csv, EscapeRoundTrip) {
  const std::vector<std::string> fields{"plain", "with,comma", "with \"quote\"", "multi\nline", ""};
  std::ostringstream out;
  write_csv_row(out, {"h1", "h2", "h3", "h4", "h5"});
  write_csv_row(out, fields);
  std::istringstream in(out.str());
  const auto t = read_csv(in);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0], fields);
}

TEST(Csv, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.125, -2.5, 0.0}) {
    double back = 0;
    ASSERT_TRUE(parse_double(format_double(v), back));
    EXPECT_EQ(back, v);
  }
  double x = 0;
  EXPECT_FALSE(parse_double("abc", x));
  EXPECT_FALSE(parse_double("1.5x", x));
  EXPECT_EQ(format_fixed(2.26, 1), "2.3");
  EXPECT_EQ(format_fixed(std::nan(""), 2), "NA");
}
