import pytest
from hypothesis import given
from hypothesis import strategies as st

from choreo.errors import DecodeError, EncodeError
from choreo.portable import Variant, decode, encode


def test_golden_encodings():
    # The byte grammar is a frozen external interface.
    assert encode(None) == b"\x00"
    assert encode(True) == b"\x01\x01"
    assert encode(False) == b"\x01\x00"
    assert encode(0) == b"\x02" + b"\x00" * 8
    assert encode(-1) == b"\x02" + b"\xff" * 8
    assert encode(258) == b"\x02\x00\x00\x00\x00\x00\x00\x01\x02"
    assert encode("hi") == b"\x03\x00\x00\x00\x02hi"
    assert encode(("k", 1)) == b"\x04" + encode("k") + encode(1)
    assert encode(Variant(3, True)) == b"\x05\x03\x01\x01"
    assert encode([True, False]) == b"\x06\x00\x00\x00\x02\x01\x01\x01\x00"
    assert encode({"b": 1, "a": 2}) == (
        b"\x07\x00\x00\x00\x02" + encode("a") + encode(2) + encode("b") + encode(1)
    )


def test_map_entries_sorted_by_encoded_key():
    # Identical values give identical bytes regardless of insertion order.
    assert encode({"x": 1, "y": 2}) == encode({"y": 2, "x": 1})


def test_roundtrip_examples():
    values = [
        None,
        True,
        -(1 << 63),
        (1 << 63) - 1,
        "",
        "déjà vu",
        ("pair", (1, 2)),
        Variant(0, "Get"),
        Variant(255, None),
        [],
        [1, "two", [True]],
        {},
        {"k": 5, "other": [None]},
        {1: "int key", ("a", 0): "pair key"},
    ]
    for v in values:
        assert decode(encode(v)) == v


def test_determinism():
    v = Variant(1, ("k", 5))
    assert encode(v) == encode(Variant(1, ("k", 5)))


def test_encode_rejects_out_of_grammar():
    with pytest.raises(EncodeError):
        encode(1 << 63)
    with pytest.raises(EncodeError):
        encode(3.14)
    with pytest.raises(EncodeError):
        encode((1, 2, 3))  # only 2-tuples are pairs
    with pytest.raises(EncodeError):
        encode(Variant(256, None))
    with pytest.raises(EncodeError):
        encode(b"raw bytes")


def test_decode_rejects_malformed():
    with pytest.raises(DecodeError):
        decode(b"")
    with pytest.raises(DecodeError):
        decode(b"\x99")
    with pytest.raises(DecodeError):
        decode(encode(42)[:-1])  # truncated frame
    with pytest.raises(DecodeError):
        decode(encode(42) + b"\x00")  # trailing bytes
    with pytest.raises(DecodeError):
        decode(b"\x01\x07")  # bad boolean byte
    # unsorted map entries are not canonical
    bad = b"\x07\x00\x00\x00\x02" + encode("b") + encode(1) + encode("a") + encode(2)
    with pytest.raises(DecodeError):
        decode(bad)


portable_values = st.recursive(
    st.none()
    | st.booleans()
    | st.integers(min_value=-(1 << 63), max_value=(1 << 63) - 1)
    | st.text(max_size=20),
    lambda inner: st.one_of(
        st.tuples(inner, inner),
        st.builds(Variant, st.integers(0, 255), inner),
        st.lists(inner, max_size=4),
        st.dictionaries(st.text(max_size=5), inner, max_size=4),
    ),
    max_leaves=12,
)


@given(portable_values)
def test_roundtrip_property(value):
    data = encode(value)
    assert decode(data) == value
    assert encode(value) == data
