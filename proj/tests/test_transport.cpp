#include <gtest/gtest.h>

#include "support.hpp"
#include "toolrag/transport.hpp"

using namespace toolrag;
using testing_support::FakeTransport;
using testing_support::TempDir;

TEST(HttpRequest, CanonicalQueryOrder) {
  auto a = HttpRequest::from_url("GET", "https://x.test/p?b=2&a=1");
  auto b = HttpRequest::from_url("GET", "https://x.test/p?a=1&b=2");
  EXPECT_EQ(a.full_url(), "https://x.test/p?a=1&b=2");
  EXPECT_EQ(a.fingerprint(), b.fingerprint());
}

TEST(HttpRequest, FingerprintIgnoresApiKey) {
  auto a = HttpRequest::from_url("GET", "https://x.test/p?a=1");
  auto b = HttpRequest::from_url("GET", "https://x.test/p?a=1&api_key=secret");
  EXPECT_EQ(a.fingerprint(), b.fingerprint());
  EXPECT_EQ(b.summary().find("secret"), std::string::npos);
}

TEST(HttpRequest, FingerprintCoversMethodAndBody) {
  auto a = HttpRequest::from_url("POST", "https://x.test/p");
  auto b = a;
  b.body = "{}";
  auto c = HttpRequest::from_url("GET", "https://x.test/p");
  EXPECT_NE(a.fingerprint(), b.fingerprint());
  EXPECT_NE(a.fingerprint(), c.fingerprint());
}

TEST(FixtureStore, SaveThenLoad) {
  TempDir dir;
  FixtureStore store(dir.path());
  auto request = HttpRequest::from_url("GET", "https://x.test/p?q=1");
  EXPECT_FALSE(store.load(request).has_value());
  store.save(request, {200, "body", false, false, 42});
  auto loaded = store.load(request);
  ASSERT_TRUE(loaded.has_value());
  EXPECT_EQ(loaded->status, 200);
  EXPECT_EQ(loaded->body, "body");
  EXPECT_EQ(loaded->fetched_at_ms, 42);
  EXPECT_TRUE(loaded->replayed);
  EXPECT_EQ(store.path_for(request).parent_path(), dir.path());
}

TEST(ReplayTransport, FixturesOnlyNeverTouchesNetwork) {
  TempDir dir;
  auto store = std::make_shared<FixtureStore>(dir.path());
  auto network = std::make_shared<FakeTransport>();
  LogicalClock clock;
  ReplayTransport replay(network, store, FetchMode::kFixturesOnly, clock);
  auto request = HttpRequest::from_url("GET", "https://x.test/missing");
  EXPECT_THROW(replay.send(request), FixtureMissingError);
  store->save(request, {200, "ok"});
  EXPECT_EQ(replay.send(request).body, "ok");
  EXPECT_EQ(network->calls(), 0u);
}

TEST(ReplayTransport, RecordThenReplayIsByteIdentical) {
  TempDir dir;
  auto store = std::make_shared<FixtureStore>(dir.path());
  auto network = std::make_shared<FakeTransport>();
  network->route("GET", "https://x.test/a?x=1", 200, "payload \xe2\x80\xa2 with bytes\n");
  LogicalClock clock;
  auto request = HttpRequest::from_url("GET", "https://x.test/a?x=1");
  ReplayTransport recorder(network, store, FetchMode::kRecord, clock);
  HttpResponse live = recorder.send(request);
  std::string first = testing_support::read_file(store->path_for(request));

  ReplayTransport replayer(nullptr, store, FetchMode::kFixturesOnly, clock);
  HttpResponse replayed = replayer.send(request);
  EXPECT_EQ(replayed.body, live.body);
  EXPECT_EQ(replayed.status, live.status);

  LogicalClock fresh;
  ReplayTransport again(network, store, FetchMode::kRecord, fresh);
  again.send(request);
  EXPECT_EQ(testing_support::read_file(store->path_for(request)), first);
}

TEST(ReplayTransport, LiveModeWithoutNetworkFails) {
  TempDir dir;
  LogicalClock clock;
  ReplayTransport replay(nullptr, std::make_shared<FixtureStore>(dir.path()), FetchMode::kLive, clock);
  EXPECT_THROW(replay.send(HttpRequest::from_url("GET", "https://x.test/")), TransportError);
}

TEST(Retry, RecoversFromTransportErrorsAnd5xx) {
  FakeTransport network;
  network.route("GET", "https://x.test/r", 200, "fine");
  network.fail_next(1);
  network.queue_status(503);
  RetryPolicy policy{3, std::chrono::milliseconds(0), 2.0};
  HttpResponse response = send_with_retry(network, HttpRequest::from_url("GET", "https://x.test/r"), policy);
  EXPECT_EQ(response.body, "fine");
  EXPECT_EQ(network.calls(), 3u);
}

TEST(Retry, FourHundredsAreNotRetried) {
  FakeTransport network;
  RetryPolicy policy{3, std::chrono::milliseconds(0), 2.0};
  HttpResponse response = send_with_retry(network, HttpRequest::from_url("GET", "https://x.test/none"), policy);
  EXPECT_EQ(response.status, 404);
  EXPECT_EQ(network.calls(), 1u);
}

TEST(Retry, ExhaustedTransportErrorsRethrow) {
  FakeTransport network;
  network.fail_next(5);
  RetryPolicy policy{2, std::chrono::milliseconds(0), 2.0};
  EXPECT_THROW(send_with_retry(network, HttpRequest::from_url("GET", "https://x.test/"), policy), TransportError);
  EXPECT_EQ(network.calls(), 2u);
}

TEST(Import, CapturedManifestMatchesBundledFixtures) {
  TempDir dir;
  FixtureStore store(dir.path());
  auto manifest = testing_support::data_dir() / "fixtures" / "captured" / "manifest.json";
  std::size_t written = import_captured_responses(manifest, store);
  EXPECT_EQ(written, 12u);
  for (const auto& entry : std::filesystem::directory_iterator(dir.path())) {
    auto bundled = testing_support::data_dir() / "fixtures" / "http" / entry.path().filename();
    ASSERT_TRUE(std::filesystem::exists(bundled)) << entry.path();
    EXPECT_EQ(testing_support::read_file(entry.path()), testing_support::read_file(bundled));
  }
}

TEST(Import, MissingManifestIsIoError) {
  TempDir dir;
  FixtureStore store(dir.path());
  try {
    import_captured_responses(dir / "absent.json", store);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIoError);
  }
}
