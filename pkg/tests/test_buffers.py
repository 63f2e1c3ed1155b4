import pytest
from hypothesis import given, settings, strategies as st

from gewisim.buffers import (
    Consume,
    EntanglementBuffer,
    EprRecord,
    Message,
    MessageBuffer,
    Overflow,
    StoreResult,
    ebuf_store,
    ebuf_take,
    mbuf_offer,
    mbuf_pop,
)


def rec(i):
    return EprRecord(i, float(10 * i))


class TestEntanglementBuffer:
    def test_drop_new_when_full(self):
        buf = EntanglementBuffer(2, Overflow.DROP_NEW)
        assert ebuf_store(buf, rec(0)) == (StoreResult.STORED, None)
        assert ebuf_store(buf, rec(1)) == (StoreResult.STORED, None)
        assert ebuf_store(buf, rec(2)) == (StoreResult.DROPPED_NEW, None)
        assert buf.ids() == [0, 1]

    def test_replace_oldest(self):
        buf = EntanglementBuffer(2, Overflow.REPLACE_OLDEST)
        ebuf_store(buf, rec(0))
        ebuf_store(buf, rec(1))
        assert ebuf_store(buf, rec(2)) == (StoreResult.REPLACED_OLDEST, 0)
        assert buf.ids() == [1, 2]

    @pytest.mark.parametrize("overflow", list(Overflow))
    def test_zero_capacity(self, overflow):
        buf = EntanglementBuffer(0, overflow)
        for i in range(3):
            assert buf.store(rec(i)) is StoreResult.DROPPED_NEW
        assert len(buf) == 0

    @pytest.mark.parametrize("consume, expected", [(Consume.FIFO, 0), (Consume.FILO, 2)])
    def test_take_order(self, consume, expected):
        buf = EntanglementBuffer(5, consume=consume)
        for i in range(3):
            buf.store(rec(i))
        assert ebuf_take(buf).id == expected

    def test_single_slot_policies_agree(self):
        taken = []
        for consume in Consume:
            buf = EntanglementBuffer(1, consume=consume)
            buf.store(rec(7))
            taken.append(buf.take().id)
        assert taken == [7, 7]

    def test_take_empty(self):
        assert ebuf_take(EntanglementBuffer(3)) is None

    def test_negative_capacity(self):
        with pytest.raises(ValueError):
            EntanglementBuffer(-1)

    def test_record_defaults(self):
        r = EprRecord(3, 40.0)
        assert r.last_update_time == 40.0 and r.fresh

    @settings(max_examples=100, deadline=None)
    @given(
        capacity=st.integers(0, 6),
        overflow=st.sampled_from(list(Overflow)),
        consume=st.sampled_from(list(Consume)),
        ops=st.lists(st.booleans(), max_size=80),
    )
    def test_conservation_and_capacity(self, capacity, overflow, consume, ops):
        buf = EntanglementBuffer(capacity, overflow, consume)
        stored, taken, evicted, dropped = [], [], [], []
        next_id = 0
        for is_store in ops:
            if is_store:
                result, ev = ebuf_store(buf, rec(next_id))
                if result is StoreResult.DROPPED_NEW:
                    dropped.append(next_id)
                else:
                    stored.append(next_id)
                if ev is not None:
                    evicted.append(ev)
                next_id += 1
            else:
                r = ebuf_take(buf)
                if r is not None:
                    taken.append(r.id)
            assert len(buf) <= capacity
            ids = buf.ids()
            assert ids == sorted(ids) and len(set(ids)) == len(ids)
        assert sorted(taken + evicted + buf.ids()) == sorted(stored)

    @settings(max_examples=50, deadline=None)
    @given(ops=st.lists(st.booleans(), max_size=60))
    def test_fifo_without_eviction_preserves_order(self, ops):
        buf = EntanglementBuffer(1000, Overflow.DROP_NEW, Consume.FIFO)
        taken, n = [], 0
        for is_store in ops:
            if is_store:
                buf.store(rec(n))
                n += 1
            elif (r := buf.take()) is not None:
                taken.append(r.id)
        assert taken == list(range(len(taken)))


class TestMessageBuffer:
    def test_single_job_buffer(self):
        buf = MessageBuffer(4, 4)
        assert mbuf_offer(buf, Message(0, (0, 1, 1, 0)))
        assert not mbuf_offer(buf, Message(1, (1, 1, 1, 1)))
        assert mbuf_pop(buf).seq == 0
        assert mbuf_offer(buf, Message(2, (0, 0, 0, 0)))

    def test_five_jobs(self):
        buf = MessageBuffer(20, 4)
        assert all(buf.offer(Message(i, (0, 0, 0, 1))) for i in range(5))
        assert not buf.offer(Message(5, (0, 0, 0, 1)))
        assert [buf.pop().seq for _ in range(5)] == list(range(5))
        assert buf.pop() is None

    def test_wrong_length_rejected(self):
        with pytest.raises(ValueError):
            MessageBuffer(8, 4).offer((1, 0))

    def test_plain_sequences_accepted(self):
        buf = MessageBuffer(8, 4)
        assert buf.offer((1, 0, 1, 0)) and buf.peek() == (1, 0, 1, 0)
        assert buf.max_messages == 2

    @settings(max_examples=50, deadline=None)
    @given(jobs=st.integers(1, 6), ops=st.lists(st.booleans(), max_size=50))
    def test_capacity_invariant(self, jobs, ops):
        buf = MessageBuffer(4 * jobs, 4)
        for i, offer in enumerate(ops):
            if offer:
                buf.offer(Message(i, (0, 0, 0, 0)))
            else:
                buf.pop()
            assert len(buf) * 4 <= 4 * jobs
