// Copyright 2026 The PairKB Authors
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

#include "pairkb/providers.h"

#include <gtest/gtest.h>

#include <atomic>
#include <random>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "pairkb/fixture.h"
#include "test_support.h"

namespace pairkb {
namespace {

using namespace std::chrono_literals;
using testing::code_of;
using testing::ScratchDir;
using testing::write_bytes;

TEST(StubTest, TextTableLookup) {
  const TextTable table{{"dog barking", Embedding{1.0f, 0.0f}},
                        {"rain falling", Embedding{0.0f, 1.0f}},
                        {"loud", Embedding{0.0f, 5.0f}}};
  EXPECT_EQ(stub_text_encode("dog barking", table), (Embedding{1.0f, 0.0f}));
  EXPECT_EQ(stub_text_encode("rain falling", table), (Embedding{0.0f, 1.0f}));
  EXPECT_EQ(stub_text_encode("loud", table), (Embedding{0.0f, 1.0f}));
  EXPECT_EQ(code_of([&] { stub_text_encode("unseen", table); }), ErrorCode::kUnknownCaption);
}

TEST(StubTest, CaptionTableLookup) {
  const CaptionTable table{{"clip-1", "dog barking"}, {"clip-2", "rain falling"}};
  EXPECT_EQ(stub_caption("clip-1", table), "dog barking");
  EXPECT_EQ(stub_caption("clip-2", table), "rain falling");
  EXPECT_EQ(code_of([&] { stub_caption("clip-9", table); }), ErrorCode::kUnknownAudioRef);
}

TEST(StubTest, TablesLoadFromJson) {
  ScratchDir dir("prov");
  write_bytes(dir / "texts.json", R"({"dog barking": [1.0, 0.0], "rain": [0, 2]})");
  write_bytes(dir / "caps.json", R"({"clip-1": "dog barking"})");
  const TableTextEncoder enc(load_text_table(dir / "texts.json"));
  EXPECT_EQ(enc.dim(), 2u);
  EXPECT_EQ(enc.kind(), ProviderKind::kStub);
  EXPECT_EQ(enc.encode("rain"), (Embedding{0.0f, 1.0f}));
  const TableCaptioner cap(load_caption_table(dir / "caps.json"));
  EXPECT_EQ(cap.caption("clip-1"), "dog barking");

  write_bytes(dir / "bad.json", R"({"x": "not a vector"})");
  EXPECT_EQ(code_of([&] { load_text_table(dir / "bad.json"); }), ErrorCode::kInvalidArgument);
  write_bytes(dir / "mixed.json", R"({"a": [1, 0], "b": [1, 0, 0]})");
  EXPECT_EQ(code_of([&] { TableTextEncoder(load_text_table(dir / "mixed.json")); }),
            ErrorCode::kDimMismatch);
  EXPECT_EQ(code_of([&] { load_caption_table(dir / "missing.json"); }), ErrorCode::kIoError);
  EXPECT_EQ(code_of([&] { make_text_encoder("table:" + (dir / "texts.json").string(), 3); }),
            ErrorCode::kDimMismatch);
  EXPECT_EQ(code_of([&] { make_captioner("magic:x"); }), ErrorCode::kInvalidArgument);
}

TEST(StoreEncoderTest, LooksUpKnowledgeBase) {
  auto kb = std::make_shared<const KnowledgeBase>(toy_kb());
  const StoreEncoder text(kb, Modality::kText);
  const StoreEncoder audio(kb, Modality::kAudio);
  EXPECT_EQ(text.dim(), 2u);
  EXPECT_EQ(text.encode("rain falling"), (Embedding{0.0f, 1.0f}));
  EXPECT_EQ(audio.encode("clip-1"), (Embedding{1.0f, 0.0f}));
  EXPECT_EQ(code_of([&] { text.encode("nope"); }), ErrorCode::kUnknownCaption);
  EXPECT_EQ(code_of([&] { audio.encode("nope"); }), ErrorCode::kUnknownAudioRef);
}

TEST(RemoteProtocolTest, EndpointParsing) {
  const auto ep = parse_endpoint("http://localhost:9000/v1/encode");
  EXPECT_EQ(ep.scheme_host_port, "http://localhost:9000");
  EXPECT_EQ(ep.path, "/v1/encode");
  EXPECT_EQ(parse_endpoint("http://h").path, "/");
  EXPECT_EQ(code_of([] { parse_endpoint("https://h/x"); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { parse_endpoint("http:///x"); }), ErrorCode::kInvalidArgument);
}

TEST(RemoteProtocolTest, RequestBodies) {
  using nlohmann::json;
  EXPECT_EQ(json::parse(encode_request_body({Modality::kText, "dog"})),
            json::parse(R"({"modality":"text","text":"dog"})"));
  EXPECT_EQ(json::parse(encode_request_body({Modality::kAudio, "clip-1"})),
            json::parse(R"({"modality":"audio","audio_uri":"clip-1"})"));
}

TEST(RemoteProtocolTest, ResponseValidation) {
  EXPECT_EQ(parse_encode_response(R"({"values":[0,3],"dim":2})", 2), (Embedding{0.0f, 1.0f}));
  EXPECT_EQ(parse_encode_response(R"({"values":[1,0]})", 2), (Embedding{1.0f, 0.0f}));
  EXPECT_EQ(code_of([] { parse_encode_response(R"({"values":[1,0,0],"dim":3})", 2); }),
            ErrorCode::kDimMismatch);
  EXPECT_EQ(code_of([] { parse_encode_response(R"({"values":[1,0],"dim":3})", 2); }),
            ErrorCode::kMalformedResponse);
  EXPECT_EQ(code_of([] { parse_encode_response("[1,0]", 2); }), ErrorCode::kMalformedResponse);
  EXPECT_EQ(code_of([] { parse_encode_response("", 2); }), ErrorCode::kMalformedResponse);
  EXPECT_EQ(code_of([] { parse_encode_response(R"({"values":[1,"x"]})", 2); }),
            ErrorCode::kMalformedResponse);
  EXPECT_EQ(code_of([] { parse_encode_response(R"({"values":[1e39,0]})", 2); }),
            ErrorCode::kNonFiniteResponse);
  EXPECT_EQ(code_of([] { parse_encode_response(R"({"values":[0,0]})", 2); }),
            ErrorCode::kZeroVector);
}

TEST(RemoteProtocolTest, FuzzedBodiesOnlyRaiseTypedErrors) {
  const std::vector<std::string> seeds{
      R"({"values":[0.6,0.8],"dim":2})", R"({"values":[],"dim":0})", R"({"values":null})",
      R"({"values":[1,2],"dim":-1})",    R"({"values":[true,false]})", R"({"dim":2})",
      R"({"values":[1e308,1e308]})",     R"({"values":{"a":1}})",
  };
  std::mt19937_64 rng(2024);
  const std::string alphabet = "{}[]\":,0123456789.eE-+ valuesdimnull";
  int ok = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    std::string body = seeds[trial % seeds.size()];
    const int edits = static_cast<int>(rng() % 4);
    for (int e = 0; e < edits && !body.empty(); ++e) {
      const auto pos = rng() % body.size();
      switch (rng() % 3) {
        case 0: body[pos] = alphabet[rng() % alphabet.size()]; break;
        case 1: body.erase(pos, 1); break;
        default: body.insert(pos, 1, alphabet[rng() % alphabet.size()]); break;
      }
    }
    try {
      const auto v = parse_encode_response(body, 2);
      EXPECT_EQ(v.dim(), 2u);
      EXPECT_TRUE(v.is_unit());
      ++ok;
    } catch (const Error&) {
    } catch (const std::exception& e) {
      ADD_FAILURE() << "untyped exception for body " << body << ": " << e.what();
    }
  }
  EXPECT_GT(ok, 0);
}

// Minimal encoder host on an ephemeral port.
class MockEncoder {
 public:
  explicit MockEncoder(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
    server_.Post("/encode", std::move(handler));
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~MockEncoder() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/encode"; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

TEST(RemoteEncodeTest, EchoesVectorAndReportsRequest) {
  std::string seen;
  MockEncoder mock([&](const httplib::Request& req, httplib::Response& res) {
    seen = req.body;
    res.set_content(R"({"values":[0.0,1.0],"dim":2})", "application/json");
  });
  EXPECT_EQ(remote_encode({Modality::kText, "rain"}, mock.url(), 2s, 2), (Embedding{0.0f, 1.0f}));
  EXPECT_EQ(seen, R"({"modality":"text","text":"rain"})");
}

TEST(RemoteEncodeTest, TypedFailures) {
  MockEncoder wrong_dim([](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"values":[1,0,0],"dim":3})", "application/json");
  });
  EXPECT_EQ(code_of([&] { remote_encode({Modality::kText, "x"}, wrong_dim.url(), 2s, 2); }),
            ErrorCode::kDimMismatch);

  MockEncoder status([](const httplib::Request&, httplib::Response& res) {
    res.status = 500;
    res.set_content("boom", "text/plain");
  });
  EXPECT_EQ(code_of([&] { remote_encode({Modality::kText, "x"}, status.url(), 2s, 2); }),
            ErrorCode::kHttpStatus);

  MockEncoder nan([](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"values":[1e40,0],"dim":2})", "application/json");
  });
  EXPECT_EQ(code_of([&] { remote_encode({Modality::kText, "x"}, nan.url(), 2s, 2); }),
            ErrorCode::kNonFiniteResponse);

  MockEncoder slow([](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(600ms);
    res.set_content(R"({"values":[1,0],"dim":2})", "application/json");
  });
  EXPECT_EQ(code_of([&] { remote_encode({Modality::kText, "x"}, slow.url(), 150ms, 2); }),
            ErrorCode::kTimeout);

  // Nothing listens on the discard port.
  const int dead_port = 9;
  const auto dead = "http://127.0.0.1:" + std::to_string(dead_port) + "/encode";
  EXPECT_EQ(code_of([&] { remote_encode({Modality::kText, "x"}, dead, 1s, 2); }),
            ErrorCode::kTransportError);
}

TEST(RemoteEncoderTest, BoundsRequestsInFlight) {
  std::atomic<int> active{0};
  std::atomic<int> peak{0};
  MockEncoder mock([&](const httplib::Request&, httplib::Response& res) {
    const int now = ++active;
    int prev = peak.load();
    while (now > prev && !peak.compare_exchange_weak(prev, now)) {
    }
    std::this_thread::sleep_for(30ms);
    --active;
    res.set_content(R"({"values":[1,0],"dim":2})", "application/json");
  });
  const RemoteEncoder enc({mock.url(), 2, 2s, 2}, Modality::kText);
  EXPECT_EQ(enc.kind(), ProviderKind::kRemote);
  std::vector<std::thread> threads;
  std::atomic<int> ok{0};
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&] {
      if (enc.encode("x") == Embedding{1.0f, 0.0f}) ++ok;
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(ok.load(), 8);
  EXPECT_LE(peak.load(), 2);
  EXPECT_GE(peak.load(), 1);
}

TEST(RemoteEncoderTest, ConfigurationErrors) {
  EXPECT_EQ(code_of([] { RemoteEncoder({"http://h/x", 0, 1s, 2}, Modality::kText); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { RemoteEncoder({"http://h/x", 2, 1s, 0}, Modality::kText); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { RemoteEncoder({"ftp://h/x", 2, 1s, 2}, Modality::kText); }),
            ErrorCode::kInvalidArgument);
}

TEST(RemoteCaptionerTest, ProtocolAndErrors) {
  MockEncoder mock([](const httplib::Request& req, httplib::Response& res) {
    if (req.body == R"({"audio_ref":"clip-1"})") {
      res.set_content(R"({"caption":"dog barking"})", "application/json");
    } else {
      res.set_content(R"({"nothing":1})", "application/json");
    }
  });
  const RemoteCaptioner cap(mock.url(), 2s);
  EXPECT_EQ(cap.caption("clip-1"), "dog barking");
  EXPECT_EQ(code_of([&] { cap.caption("clip-2"); }), ErrorCode::kMalformedResponse);
}

}  // namespace
}  // namespace pairkb
