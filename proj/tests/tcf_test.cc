#include "consent_audit/tcf.h"

#include <gtest/gtest.h>

#include <random>

#include "consent_audit/tcf_json.h"
#include "test_support.h"

namespace consent_audit::tcf {
namespace {

using test::RandomRecord;

TEST(TcfCodec, RoundTripsRandomRecords) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 300; ++i) {
    const auto r = RandomRecord(rng);
    ASSERT_EQ(DecodeTcf(EncodeTcf(r)), r) << "record " << i;
  }
}

TEST(TcfCodec, OracleStringsDecodeToSourceRecord) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    const auto r = RandomRecord(rng);
    ASSERT_EQ(DecodeTcf(test::oracle::Encode(r)), r) << "record " << i;
  }
}

TEST(TcfCodec, ReencodingUnmodifiedDecodeIsByteIdentical) {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 100; ++i) {
    const std::string text = test::oracle::Encode(RandomRecord(rng));
    ASSERT_EQ(EncodeTcf(DecodeTcf(text)), text);
  }
}

TEST(TcfCodec, KeepsNonCanonicalRangeEntries) {
  // Two adjacent single-id entries where canonical output would be one run.
  TcfConsentRecord r;
  r.vendor_consents.max_vendor_id = 10;
  r.vendor_consents.encoding = VendorEncoding::kRange;
  r.vendor_consents.ids = {3, 4};
  r.vendor_consents.range_entries = {{3, 3}, {4, 4}};
  const std::string text = EncodeTcf(r);
  const auto back = DecodeTcf(text);
  EXPECT_EQ(back.vendor_consents.range_entries.size(), 2u);
  EXPECT_EQ(EncodeTcf(back), text);
}

TEST(TcfCodec, PreservesTrailingBitsAndSegments) {
  TcfConsentRecord r;
  r.trailing_bits = {true, false, true};
  EXPECT_THROW(EncodeTcf(r), EncodeError);
  // The default v2 core ends 5 bits short of a character boundary.
  r.trailing_bits = {false, false, false, false, false};
  EXPECT_THROW(EncodeTcf(r), EncodeError);
  r.trailing_bits = {true, false, true, false, false, true, true, false, true, false, true};
  r.extra_segments = {
      "IFoEUQQgAIQwgIwQABAEAAAAOIAACAIAAAAQAIAgEAACEAAAAAgAQBAAAAAAAGBAAgAAAAAA"
      "AFAAECAAAgAAQARAEQAAAAAJAAIAAgAAAYQEAAAQmAgBC3ZAYzUw"};
  const std::string text = EncodeTcf(r);
  EXPECT_EQ(DecodeTcf(text), r);
  EXPECT_EQ(EncodeTcf(DecodeTcf(text)), text);
}

TEST(TcfCodec, DecodesPublishedV1Example) {
  // v1.1 example string from the framework's documentation.
  const auto r = DecodeTcf("BOEFEAyOEFEAyAHABDENAI4AAAB9vABAASA");
  EXPECT_EQ(r.tcf_version, 1);
  EXPECT_EQ(r.cmp_id, 7);
  EXPECT_EQ(r.cmp_version, 1);
  EXPECT_EQ(r.consent_screen, 3);
  EXPECT_EQ(r.consent_language, "EN");
  EXPECT_EQ(r.vendor_list_version, 8);
  EXPECT_TRUE(r.HasPurpose(1));
  EXPECT_TRUE(r.HasPurpose(2));
  EXPECT_TRUE(r.HasPurpose(3));
  EXPECT_FALSE(r.HasPurpose(4));
  EXPECT_EQ(r.vendor_consents.max_vendor_id, 2011);
  EXPECT_EQ(r.vendor_consents.encoding, VendorEncoding::kRange);
  EXPECT_TRUE(r.vendor_consents.default_consent);
  EXPECT_EQ(r.vendor_consents.ids.count(9), 0u);
  EXPECT_EQ(r.vendor_consents.ids.count(1), 1u);
  EXPECT_EQ(r.vendor_consents.ids.size(), 2010u);
}

TEST(TcfCodec, ErrorKinds) {
  auto kind_of = [](std::string_view s) {
    try {
      DecodeTcf(s);
    } catch (const DecodeError& e) {
      return e.kind();
    }
    ADD_FAILURE() << "decoded " << s;
    return DecodeErrorKind::kInvalidField;
  };
  EXPECT_EQ(kind_of("CO!x"), DecodeErrorKind::kBadBase64);
  EXPECT_EQ(kind_of(""), DecodeErrorKind::kTruncatedBits);
  EXPECT_EQ(kind_of("CO"), DecodeErrorKind::kTruncatedBits);
  // Version 3.
  EXPECT_EQ(kind_of("DOEFEAyOEFEAyAHABDENAI4AAAB9vABAASA"), DecodeErrorKind::kUnsupportedVersion);
}

TEST(TcfCodec, BadBase64OffsetPointsAtCharacter) {
  try {
    DecodeTcf("COabc*");
    FAIL();
  } catch (const DecodeError& e) {
    EXPECT_EQ(e.offset(), 5u);
  }
}

TEST(TcfCodec, EncoderRejectsOutOfRangeVendor) {
  TcfConsentRecord r;
  r.vendor_consents.max_vendor_id = 5;
  r.vendor_consents.ids = {6};
  EXPECT_THROW(EncodeTcf(r), EncodeError);
}

TEST(TcfCodec, RandomBytesNeverEscapeAsOtherErrors) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 2000; ++i) {
    std::string s(std::uniform_int_distribution<int>(0, 80)(rng), '\0');
    for (auto& c : s) c = static_cast<char>(std::uniform_int_distribution<int>(0, 255)(rng));
    try {
      DecodeTcf(s);
    } catch (const DecodeError&) {
    }
  }
}

TEST(TcfPolarity, NeedsPurposeAndVendor) {
  TcfConsentRecord r;
  r.vendor_consents.max_vendor_id = 10;
  EXPECT_EQ(Polarity(r), ConsentPolarity::kNegative);
  r.SetPurpose(1);
  EXPECT_EQ(Polarity(r), ConsentPolarity::kNegative);
  r.vendor_consents.ids = {4};
  EXPECT_EQ(Polarity(r), ConsentPolarity::kPositive);
  r.SetPurpose(1, false);
  EXPECT_EQ(Polarity(r), ConsentPolarity::kNegative);
}

TEST(TcfPolarity, AddingConsentNeverFlipsToNegative) {
  std::mt19937_64 rng(19);
  for (int i = 0; i < 500; ++i) {
    auto r = RandomRecord(rng);
    const auto before = Polarity(r);
    if (r.vendor_consents.max_vendor_id > 0) {
      r.vendor_consents.ids.insert(static_cast<std::uint16_t>(
          std::uniform_int_distribution<int>(1, r.vendor_consents.max_vendor_id)(rng)));
    }
    r.SetPurpose(std::uniform_int_distribution<int>(1, kNumPurposes)(rng));
    if (before == ConsentPolarity::kPositive) {
      ASSERT_EQ(Polarity(r), ConsentPolarity::kPositive);
    }
  }
}

TEST(TcfJson, ListsIdsAndPolarity) {
  const auto j = ToJson(DecodeTcf(test::ConsentString(true)));
  EXPECT_EQ(j["polarity"], "positive");
  EXPECT_EQ(j["purposes_consent"], nlohmann::json({1, 2, 3, 4}));
  EXPECT_EQ(j["vendor_consents"]["ids"], nlohmann::json({9, 755}));
}

TEST(TcfStorage, Names) {
  EXPECT_TRUE(IsTcfStorageName("euconsent-v2"));
  EXPECT_TRUE(IsTcfStorageName("euconsent"));
  EXPECT_FALSE(IsTcfStorageName("OptanonConsent"));
}

}  // namespace
}  // namespace consent_audit::tcf
