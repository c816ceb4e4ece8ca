import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crisiswatch.threads import (
    CompactedBackend,
    KCopiesBackend,
    ThreadIndex,
    UnknownPost,
    thread_stats,
)

from oracles import thread_membership
from streams import make_post, stream_posts, thread_stream

HOUR = 3_600_000
HALF_LIFE = 6 * HOUR


def run_stream(arrivals, backend="compacted"):
    index = ThreadIndex(backend=backend, half_life_ms=HALF_LIFE)
    posts = stream_posts(arrivals)
    for post in posts:
        index.observe(post)
    return index, posts


class TestObserve:
    def test_new_thread_base_case(self):
        index = ThreadIndex()
        update = index.observe(make_post("A"))
        assert (update.root_id, update.size) == ("A", 1)
        assert index.thread_of("A").member_ids == ("A",)

    @pytest.mark.parametrize("backend", ["kcopies", "compacted"])
    def test_chain_reply_gives_k_copies(self, backend):
        index, _ = run_stream([("A", None), ("B", "A"), ("C", "B")], backend)
        for pid in "ABC":
            assert set(index.thread_of(pid).member_ids) == {"A", "B", "C"}

    @pytest.mark.parametrize("backend", ["kcopies", "compacted"])
    def test_branching_siblings_share_thread(self, backend):
        index, _ = run_stream(
            [("A", None), ("B", "A"), ("C", "A"), ("D", "B")], backend
        )
        for pid in "ABCD":
            assert set(index.thread_of(pid).member_ids) == {"A", "B", "C", "D"}

    def test_repost_links_like_reply(self):
        index = ThreadIndex()
        index.observe(make_post("A"))
        index.observe(make_post("B", repost_of="A"))
        assert set(index.thread_of("A").member_ids) == {"A", "B"}

    def test_reply_takes_precedence_over_repost(self):
        index = ThreadIndex()
        index.observe(make_post("A"))
        index.observe(make_post("X"))
        index.observe(make_post("B", reply_to="A", repost_of="X"))
        assert set(index.thread_of("A").member_ids) == {"A", "B"}
        assert set(index.thread_of("X").member_ids) == {"X"}

    def test_orphan_reply_creates_placeholder(self):
        index = ThreadIndex()
        index.observe(make_post("B", reply_to="A"))
        thread = index.thread_of("B")
        assert set(thread.member_ids) == {"A", "B"}
        assert thread.root_id == "B"  # placeholder cannot be the root
        # The placeholder is queryable through any member key.
        assert set(index.thread_of("A").member_ids) == {"A", "B"}

    def test_orphan_target_arriving_later_fills_in(self):
        index = ThreadIndex()
        index.observe(make_post("B", ts=2, reply_to="A"))
        index.observe(make_post("A", ts=1))
        thread = index.thread_of("A")
        assert set(thread.member_ids) == {"A", "B"}
        assert thread.root_id == "B"  # B arrived first, root is arrival order

    def test_orphan_target_with_own_linkage_merges_threads(self):
        index = ThreadIndex()
        index.observe(make_post("R", ts=1))
        index.observe(make_post("B", ts=2, reply_to="A"))  # orphan thread {A, B}
        index.observe(make_post("A", ts=3, reply_to="R"))  # A arrives, linking to R
        for pid in "RAB":
            assert set(index.thread_of(pid).member_ids) == {"R", "A", "B"}
        assert index.thread_of("B").root_id == "R"

    def test_reply_cycle_collapses_into_one_thread(self):
        index = ThreadIndex()
        index.observe(make_post("A", ts=1, reply_to="B"))
        index.observe(make_post("B", ts=2, reply_to="A"))
        assert set(index.thread_of("A").member_ids) == {"A", "B"}
        assert index.thread_of("B").member_ids == index.thread_of("A").member_ids


class TestThreadOf:
    def test_single_post(self):
        index = ThreadIndex()
        index.observe(make_post("X", ts=9))
        thread = index.thread_of("X")
        assert (thread.root_id, thread.size, thread.last_activity) == ("X", 1, 9)

    def test_unknown_post(self):
        index = ThreadIndex()
        with pytest.raises(UnknownPost):
            index.thread_of("nope")

    def test_chain_members_queryable_from_middle(self):
        index, _ = run_stream([("A", None), ("B", "A"), ("C", "B")])
        assert set(index.thread_of("B").member_ids) == {"A", "B", "C"}

    @pytest.mark.parametrize("backend", ["kcopies", "compacted"])
    def test_single_operation_retrieval(self, backend):
        rng = np.random.default_rng(3)
        index, posts = run_stream(thread_stream(rng, 300), backend)
        before = (index.backend.lookup_count, index.backend.read_count)
        index.thread_of(posts[137].post_id)
        after = (index.backend.lookup_count, index.backend.read_count)
        assert (after[0] - before[0], after[1] - before[1]) == (1, 1)


class TestMonotonicity:
    def test_posting_lists_only_grow(self):
        rng = np.random.default_rng(5)
        arrivals = thread_stream(rng, 400)
        index = ThreadIndex()
        sizes: dict[str, int] = {}
        for post in stream_posts(arrivals):
            index.observe(post)
            for pid in list(sizes):
                new_size = index.thread_of(pid).size
                assert new_size >= sizes[pid]
                sizes[pid] = new_size
            sizes[post.post_id] = index.thread_of(post.post_id).size


class TestOracleEquivalence:
    @pytest.mark.parametrize("backend", ["kcopies", "compacted"])
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_posting_lists_match_union_find(self, backend, seed):
        rng = np.random.default_rng(seed)
        arrivals = thread_stream(rng, 800)
        index, _ = run_stream(arrivals, backend)
        expected = thread_membership(arrivals)
        for pid, members in expected.items():
            got = index.backend.members(pid)
            assert got is not None, pid
            assert frozenset(got) == members, pid

    @given(st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=25, deadline=None)
    def test_backends_agree_on_random_forests(self, seed):
        rng = np.random.default_rng(seed)
        arrivals = thread_stream(rng, 120)
        reference, _ = run_stream(arrivals, "kcopies")
        compacted, _ = run_stream(arrivals, "compacted")
        for pid, _ in arrivals:
            assert reference.thread_of(pid) == compacted.thread_of(pid)


class TestTopThreads:
    def test_single_thread_for_any_k(self):
        index, _ = run_stream([("A", None), ("B", "A")])
        for k in (1, 5, 100):
            tops = index.top_threads(k, now=2000)
            assert [t.root_id for t in tops] == ["A"]

    def test_undecayed_scores_rank_by_size(self):
        now = 50_000
        index = ThreadIndex(half_life_ms=HALF_LIFE)
        for pid, target in [("A", None), ("B", "A"), ("C", "A"), ("X", None)]:
            index.observe(make_post(pid, ts=now, reply_to=target))
        tops = index.top_threads(2, now=now)
        assert [t.root_id for t in tops] == ["A", "X"]
        assert tops[0].activity_score == pytest.approx(3.0)
        assert tops[1].activity_score == pytest.approx(1.0)

    def test_decay_lets_fresh_small_thread_win(self):
        # 2 posts now vs 3 posts aged exactly two half-lives: 2 > 3/4.
        now = 100 * HOUR
        aged = now - 2 * HALF_LIFE
        index = ThreadIndex(half_life_ms=HALF_LIFE)
        index.observe(make_post("old", ts=aged))
        index.observe(make_post("o2", ts=aged, reply_to="old"))
        index.observe(make_post("o3", ts=aged, reply_to="old"))
        index.observe(make_post("new", ts=now))
        index.observe(make_post("n2", ts=now, reply_to="new"))
        tops = index.top_threads(2, now=now)
        assert [t.root_id for t in tops] == ["new", "old"]
        assert tops[0].activity_score == pytest.approx(2.0)
        assert tops[1].activity_score == pytest.approx(0.75)

    def test_ties_break_by_size_then_root(self):
        now = 1000
        index = ThreadIndex(half_life_ms=HALF_LIFE)
        for pid in ("b", "a"):
            index.observe(make_post(pid, ts=now))
        tops = index.top_threads(5, now=now)
        assert [t.root_id for t in tops] == ["a", "b"]

    def test_k_larger_than_thread_count_returns_all(self):
        index, _ = run_stream([("A", None), ("X", None)])
        assert len(index.top_threads(10, now=5000)) == 2


class TestThreadStats:
    def test_singleton_row(self):
        index = ThreadIndex()
        post = make_post("A", ts=7, text="hello")
        index.observe(post)
        rows = thread_stats(index, "A", {"A": post}, {"A": 0.5})
        assert len(rows) == 1
        assert rows[0].post_id == "A"
        assert rows[0].credibility == 0.5
        assert rows[0].link_to is None

    def test_chain_rows_ascend_by_timestamp(self):
        posts = {
            "A": make_post("A", ts=10, text="root"),
            "B": make_post("B", ts=20, text="reply", reply_to="A"),
            "C": make_post("C", ts=30, text="deeper", reply_to="B"),
        }
        index = ThreadIndex()
        for pid in "ABC":
            index.observe(posts[pid])
        rows = thread_stats(index, "A", posts, {})
        assert [r.post_id for r in rows] == ["A", "B", "C"]
        assert [r.link_to for r in rows] == [None, "A", "B"]

    def test_row_count_matches_thread_size(self):
        rng = np.random.default_rng(9)
        arrivals = thread_stream(rng, 200, orphan_prob=0.0)
        index, posts = run_stream(arrivals)
        post_map = {p.post_id: p for p in posts}
        root = index.thread_of(posts[0].post_id).root_id
        rows = thread_stats(index, root, post_map, {})
        assert len(rows) == index.thread_of(root).size

    def test_unknown_root(self):
        index = ThreadIndex()
        with pytest.raises(UnknownPost):
            thread_stats(index, "missing", {}, {})
