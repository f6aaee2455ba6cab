// Copyright 2026 The chainless Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "config.hpp"

#include <gtest/gtest.h>

#include <sstream>

namespace chainless::tools {
namespace {

TEST(Config, AppliesKeysAndEchoesThem) {
  RunConfig c;
  apply(c, "side", "32");
  apply(c, "temperature", "2.2, 2.3");
  apply(c, "bootstrap.averaging", "false");
  apply(c, "model", "ea");
  apply(c, "caps", "1,2,3");
  EXPECT_EQ(c.side, 32);
  EXPECT_EQ(c.temperatures, (std::vector<double>{2.2, 2.3}));
  EXPECT_FALSE(c.averaging);
  EXPECT_EQ(c.model, ModelKind::kEdwardsAnderson);
  EXPECT_EQ(c.caps.size(), 3U);
  ASSERT_EQ(c.echo.size(), 5U);
  EXPECT_EQ(c.echo[0].first, "side");
}

TEST(Config, EveryDocumentedKeyIsAccepted) {
  for (const auto& [key, help] : keys()) {
    EXPECT_FALSE(help.empty()) << key;
    RunConfig c;
    std::string value = "1";
    if (key == "model") {
      value = "ising";
    } else if (key == "output" || key == "coefficients") {
      value = "somewhere";
    } else if (key == "restrict" || key == "bootstrap.averaging") {
      value = "true";
    }
    EXPECT_NO_THROW(apply(c, key, value)) << key;
  }
}

TEST(Config, RejectsUnknownAndMalformed) {
  RunConfig c;
  EXPECT_THROW(apply(c, "sied", "16"), ConfigError);
  EXPECT_THROW(apply(c, "side", "sixteen"), ConfigError);
  EXPECT_THROW(apply(c, "side", "16x"), ConfigError);
  EXPECT_THROW(apply(c, "restrict", "maybe"), ConfigError);
  EXPECT_THROW(apply(c, "model", "potts"), ConfigError);
  EXPECT_THROW(apply(c, "caps", ""), ConfigError);
}

TEST(Config, ReadsFilesWithComments) {
  RunConfig c;
  std::istringstream is{"# comment\nside = 8   # trailing\n\n  seed=42\n"};
  apply_file(c, is);
  EXPECT_EQ(c.side, 8);
  EXPECT_EQ(c.seed, 42U);
  std::istringstream bad{"side 8\n"};
  EXPECT_THROW(apply_file(c, bad), ConfigError);
}

TEST(Config, ValidatesPerCommand) {
  RunConfig c;
  EXPECT_NO_THROW(validate(c, Command::kIsingMag));
  c.side = 12;
  EXPECT_THROW(validate(c, Command::kIsingMag), ConfigError);
  c.side = 16;
  c.temperatures = {2.2, 2.3};
  EXPECT_THROW(validate(c, Command::kIsingMag), ConfigError);
  EXPECT_NO_THROW(validate(c, Command::kIsingFlow));
  EXPECT_THROW(validate(c, Command::kEaBinder), ConfigError);
  c.model = ModelKind::kEdwardsAnderson;
  c.dim = 3;
  c.side = 4;
  EXPECT_NO_THROW(validate(c, Command::kEaBinder));
  c.realizations = 1;
  EXPECT_THROW(validate(c, Command::kEaBinder), ConfigError);
  c = RunConfig{};
  c.caps = {4, 2};
  EXPECT_THROW(validate(c, Command::kIsingMag), ConfigError);
  c = RunConfig{};
  c.side = 4;
  EXPECT_THROW(validate(c, Command::kIsingMag), ConfigError);  // fits in the base level
  c.base_limit = 4;
  EXPECT_NO_THROW(validate(c, Command::kIsingMag));
}

TEST(Config, HeaderCarriesSeedAndEcho) {
  RunConfig c;
  apply(c, "seed", "7");
  std::ostringstream os;
  write_header(os, c, Command::kIsingMag);
  const auto text = os.str();
  EXPECT_NE(text.find("command=ising-mag"), std::string::npos);
  EXPECT_NE(text.find("# seed=7"), std::string::npos);
  EXPECT_NE(text.find("# config seed = 7"), std::string::npos);
}

}  // namespace
}  // namespace chainless::tools
