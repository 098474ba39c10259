// Copyright 2026 The spatrwd Authors.
// SPDX-License-Identifier: Apache-2.0

#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "spatrwd/backend.hpp"
#include "spatrwd/service.hpp"
#include "test_support.hpp"

using namespace spatrwd;
using spatrwd::testing::Obj;

namespace {

SceneGraph Desk() {
  SceneGraph scene;
  scene.objects.push_back(Obj("c", "cup", {0.1, 0.4, 0.25, 0.55}, "red"));
  scene.objects.push_back(Obj("l", "laptop", {0.5, 0.35, 0.85, 0.6}, "gray"));
  return scene;
}

Json Body(const std::string& prompt) {
  return Json{{"prompt", prompt}, {"image", "images/sample.png"}, {"scene", ToJson(Desk())}};
}

}  // namespace

TEST_CASE("service output matches the shared renderer") {
  const ScoringService service(Settings{}, nullptr);
  for (const char* prompt : {"a cup to the left of a laptop", "a red cup above a laptop"}) {
    const HttpReply reply = service.Score(Body(prompt).dump());
    CHECK(reply.status == 200);
    ScoreRequest request = ParseScoreRequest(Body(prompt));
    auto backend = FixtureBackend(Desk(), RelationConfig{});
    CHECK(reply.body == ScoreAndRender(request, EngineConfig{}, *backend));
  }
  Json md = Body("a cup to the left of a laptop");
  md["format"] = "md";
  const HttpReply reply = service.Score(md.dump());
  CHECK(reply.content_type == "text/markdown");
  CHECK(reply.body.rfind("#", 0) == 0);
}

TEST_CASE("per-request config overrides the service settings") {
  const ScoringService service(Settings{}, nullptr);
  Json body = Body("a cup to the right of a laptop");
  body["config"] = Json{{"tau_pass", 0.5}};
  const Json doc = Json::parse(service.Score(body.dump()).body);
  CHECK(doc["verdict"] == true);
  CHECK(doc["config"]["tau_pass"] == 0.5);
}

TEST_CASE("bad requests map to status codes") {
  const ScoringService service(Settings{}, nullptr);
  HttpReply r = service.Score("{not json");
  CHECK(r.status == 400);
  CHECK(Json::parse(r.body)["error"]["kind"] == "SchemaViolation");

  Json body = Body("a cup");
  body["colour"] = 1;
  r = service.Score(body.dump());
  CHECK(r.status == 400);
  CHECK(Json::parse(r.body)["error"]["path"] == "colour");

  body = Body("a cup");
  body["constraints"] = Json::object();
  CHECK(service.Score(body.dump()).status == 400);

  body = Body("a cup");
  body["scene"]["objects"][0]["box"] = Json::parse("[0.5,0.5,0.1,0.1]");
  r = service.Score(body.dump());
  CHECK(r.status == 400);
  CHECK(Json::parse(r.body)["error"]["path"].get<std::string>().rfind("scene.objects[0].box", 0) == 0);

  r = service.Score(Body("the quick brown fox jumps").dump());
  CHECK(r.status == 400);
  CHECK(Json::parse(r.body)["error"]["stage"] == "decompose");

  r = service.Score(Json{{"prompt", "a cup"}}.dump());
  CHECK(r.status == 502);
  CHECK(Json::parse(r.body)["error"]["kind"] == "BackendUnavailable");

  body = Body("a cup");
  body["config"] = Json{{"tau_pass", 3}};
  CHECK(service.Score(body.dump()).status == 400);
}

TEST_CASE("health reports the backend after its handshake") {
  auto backend = FixtureBackend(Desk(), RelationConfig{});
  const ScoringService service(Settings{}, backend);
  Json h = Json::parse(service.Health().body);
  CHECK(h["ok"] == true);
  CHECK(h["backend"] == "unavailable");
  CHECK(service.Score(Json{{"prompt", "a cup"}}.dump()).status == 200);
  h = Json::parse(service.Health().body);
  CHECK(h["backend"] == "ready");
  CHECK(Json::parse(service.Config().body)["config"]["tau_pass"] == 0.8);
}

TEST_CASE("http round trip") {
  ScoringService service(Settings{}, nullptr);
  const int port = service.Bind("127.0.0.1", 0);
  REQUIRE(port > 0);
  std::thread t([&] { service.Serve(); });
  httplib::Client client("127.0.0.1", port);
  const std::string body = Body("a cup to the left of a laptop").dump();
  auto res = client.Post("/v1/score", httplib::Headers{{"X-Request-Id", "abc"}}, body, "application/json");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(res->get_header_value("X-Request-Id") == "abc");
  CHECK(res->body == service.Score(body).body);
  res = client.Post("/v1/score", "[]", "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);
  res = client.Get("/v1/health");
  REQUIRE(res);
  CHECK(Json::parse(res->body)["ok"] == true);
  CHECK_FALSE(res->get_header_value("X-Request-Id").empty());
  service.Stop();
  t.join();
}
