from hallumeta.dataset import Record, TaskType
from hallumeta.scorers.cache import CacheEntry, ScorerCache, fingerprint


def make_record(**kw):
    base = dict(
        id="r-0",
        task=TaskType.MACHINE_TRANSLATION,
        src="la maison bleue",
        hyp="the blue house",
        tgt="the blue house",
    )
    base.update(kw)
    return Record(**base)


class TestFingerprint:
    def test_stable(self):
        assert fingerprint(make_record()) == fingerprint(make_record())

    def test_sensitive_to_text_fields(self):
        base = fingerprint(make_record())
        assert fingerprint(make_record(src="other")) != base
        assert fingerprint(make_record(hyp="other")) != base
        assert fingerprint(make_record(tgt="other")) != base
        assert fingerprint(make_record(task=TaskType.PARAPHRASE_GENERATION)) != base

    def test_id_is_not_part_of_the_key(self):
        # two records with the same content but different ids share cache hits
        assert fingerprint(make_record(id="a")) == fingerprint(make_record(id="b"))


class TestScorerCache:
    def test_put_then_get(self):
        cache = ScorerCache()
        cache.put("judge@1", "fp", 3, 0.4, raw={"votes": 2})
        entry = cache.get("judge@1", "fp", 3)
        assert entry == CacheEntry(score=0.4, raw={"votes": 2})

    def test_miss_returns_none(self):
        cache = ScorerCache()
        assert cache.get("judge@1", "fp", 0) is None

    def test_seed_is_part_of_the_key(self):
        cache = ScorerCache()
        cache.put("judge@1", "fp", 0, 0.1, raw=None)
        assert cache.get("judge@1", "fp", 1) is None

    def test_scorer_key_is_part_of_the_key(self):
        cache = ScorerCache()
        cache.put("judge@1", "fp", 0, 0.1, raw=None)
        assert cache.get("nli@1", "fp", 0) is None

    def test_last_writer_wins(self):
        cache = ScorerCache()
        cache.put("s", "fp", 0, 0.2, raw="first")
        cache.put("s", "fp", 0, 0.8, raw="second")
        entry = cache.get("s", "fp", 0)
        assert entry.score == 0.8
        assert entry.raw == "second"
        assert len(cache) == 1

    def test_none_score_is_cacheable(self):
        # abstentions are recorded so they are not retried on replay
        cache = ScorerCache()
        cache.put("s", "fp", 0, None, raw="mumble")
        entry = cache.get("s", "fp", 0)
        assert entry is not None
        assert entry.score is None


class TestPersistence:
    def test_round_trip_across_instances(self, tmp_path):
        path = tmp_path / "cache.jsonl"
        first = ScorerCache(path)
        first.put("judge@1", "fp-a", 0, 0.25, raw={"reply": "ok"})
        first.put("nli@1", "fp-b", 7, None, raw=0.9)

        second = ScorerCache(path)
        assert len(second) == 2
        assert second.get("judge@1", "fp-a", 0).score == 0.25
        assert second.get("nli@1", "fp-b", 7).raw == 0.9

    def test_reload_applies_last_writer_wins(self, tmp_path):
        path = tmp_path / "cache.jsonl"
        first = ScorerCache(path)
        first.put("s", "fp", 0, 0.2, raw=None)
        first.put("s", "fp", 0, 0.9, raw=None)

        # file keeps both lines, reload collapses to the newest
        assert len(path.read_text().strip().splitlines()) == 2
        second = ScorerCache(path)
        assert len(second) == 1
        assert second.get("s", "fp", 0).score == 0.9

    def test_blank_lines_ignored_on_load(self, tmp_path):
        path = tmp_path / "cache.jsonl"
        cache = ScorerCache(path)
        cache.put("s", "fp", 0, 0.5, raw=None)
        with open(path, "a", encoding="utf-8") as fh:
            fh.write("\n\n")
        assert len(ScorerCache(path)) == 1

    def test_missing_file_starts_empty(self, tmp_path):
        cache = ScorerCache(tmp_path / "absent.jsonl")
        assert len(cache) == 0
