import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sigclass import ingest
from sigclass.errors import (
    DuplicateKey,
    InsufficientClassSamples,
    MalformedRow,
    RangeViolation,
    UnsortedStream,
)
from sigclass.types import ChannelRecord, ObservationRecord, SignalClass

from .test_types import make_sample

OBS_CSV = (
    "epoch,sat_id,elevation_deg,azimuth_deg,cn0_rhcp_dbhz,cn0_lhcp_dbhz\n"
    "0.0,G01,45.0,120.0,44.5,37.0\n"
    "0.0,G07,12.5,301.0,33.0,34.5\n"
    "1.0,G01,45.1,120.1,44.0,36.5\n"
)


def test_parse_observation_csv_happy_path():
    records = ingest.parse_observation_csv(OBS_CSV)
    assert len(records) == 3
    assert records[0].sat_id == "G01"
    assert records[1].cn0_lhcp_dbhz == 34.5
    assert records[2].epoch == 1.0


def test_parse_rejects_wrong_header():
    with pytest.raises(MalformedRow) as ei:
        ingest.parse_observation_csv("epoch,sat_id\n")
    assert ei.value.line_no == 1


def test_parse_reports_line_numbers():
    bad = OBS_CSV + "2.0,G01,45.0,120.0,44.0\n"
    with pytest.raises(MalformedRow) as ei:
        ingest.parse_observation_csv(bad)
    assert ei.value.line_no == 5


def test_parse_range_violation_names_field():
    bad = OBS_CSV.replace("0.0,G07,12.5", "0.0,G07,95.0")
    with pytest.raises(RangeViolation) as ei:
        ingest.parse_observation_csv(bad)
    assert ei.value.field == "elevation_deg"
    assert ei.value.line_no == 3


def test_parse_duplicate_epoch_sat_pair():
    bad = OBS_CSV + "1.0,G01,45.1,120.1,44.0,36.5\n"
    with pytest.raises(DuplicateKey):
        ingest.parse_observation_csv(bad)


def test_observation_round_trip_bytes():
    records = ingest.parse_observation_csv(OBS_CSV)
    assert ingest.serialize_observation_csv(records) == OBS_CSV


def ch(epoch, sat, cn0, el=45.0, az=120.0):
    return ChannelRecord(epoch=epoch, sat_id=sat, elevation_deg=el,
                         azimuth_deg=az, cn0_dbhz=cn0)


def test_pairing_matches_nearest_epoch_within_skew():
    rhcp = [ch(0.0, "G01", 44.0), ch(1.0, "G01", 43.5)]
    lhcp = [ch(0.3, "G01", 36.0), ch(1.4, "G01", 35.0)]
    paired = ingest.pair_receiver_streams(rhcp, lhcp)
    assert [p.cn0_lhcp_dbhz for p in paired] == [36.0, 35.0]
    assert not any(p.lhcp_imputed for p in paired)


def test_pairing_imputes_tracking_floor_when_no_match():
    rhcp = [ch(0.0, "G01", 44.0), ch(10.0, "G01", 43.0)]
    lhcp = [ch(0.1, "G01", 36.0)]
    paired = ingest.pair_receiver_streams(rhcp, lhcp)
    assert paired[1].cn0_lhcp_dbhz == 25.0
    assert paired[1].lhcp_imputed
    assert not paired[0].lhcp_imputed


def test_pairing_never_crosses_satellites():
    rhcp = [ch(0.0, "G01", 44.0)]
    lhcp = [ch(0.0, "G02", 30.0)]
    paired = ingest.pair_receiver_streams(rhcp, lhcp)
    assert paired[0].lhcp_imputed


def test_pairing_rejects_unsorted_stream():
    rhcp = [ch(1.0, "G01", 44.0), ch(0.0, "G01", 43.0)]
    with pytest.raises(UnsortedStream):
        ingest.pair_receiver_streams(rhcp, [])


def test_stratified_subsample_exact_and_deterministic():
    samples = []
    for i in range(30):
        samples.append(make_sample(SignalClass(i % 3), epoch=float(i)))
    ds = ingest.build_dataset(samples, "T0")
    sub1 = ingest.stratified_subsample(ds, 4, seed=7)
    sub2 = ingest.stratified_subsample(ds, 4, seed=7)
    assert sub1 == sub2
    assert all(v == 4 for v in sub1.class_counts.values())
    # original order is preserved
    epochs = [s.provenance.epoch for s in sub1.samples]
    assert epochs == sorted(epochs)
    with pytest.raises(InsufficientClassSamples):
        ingest.stratified_subsample(ds, 11, seed=7)


def test_dataset_csv_round_trip():
    samples = [
        make_sample(SignalClass.NLOS_ONLY, el=12.5, rhcp=29.25, diff=-3.5, epoch=2.0),
        make_sample(SignalClass.LOS_NLOS, el=80.0, rhcp=47.0, diff=1.0, epoch=3.0),
    ]
    ds = ingest.build_dataset(samples, "T2")
    text = ingest.serialize_dataset_csv(ds)
    back = ingest.parse_dataset_csv(text, "T2")
    assert back == ds
    assert ingest.serialize_dataset_csv(back) == text


def test_catalog_validation():
    catalog = {"T2": {"total": 6311,
                      "class_counts": {"NLOS": 2038, "LOS": 2195, "LOS+NLOS": 2078}}}
    ingest.validate_catalog(catalog)
    catalog["T2"]["total"] = 6312
    with pytest.raises(ValueError):
        ingest.validate_catalog(catalog)


finite_cn0 = st.floats(min_value=10.0, max_value=60.0, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(
        st.tuples(
            st.floats(min_value=0.0, max_value=604799.0),
            st.sampled_from(["G01", "G07", "R22"]),
            st.floats(min_value=0.0, max_value=90.0),
            st.floats(min_value=0.0, max_value=359.9),
            finite_cn0,
            finite_cn0,
        ),
        max_size=20,
        unique_by=lambda r: (r[0], r[1]),
    )
)
def test_observation_serialization_round_trips_any_records(rows):
    records = [ObservationRecord(*row) for row in rows]
    text = ingest.serialize_observation_csv(records)
    assert ingest.parse_observation_csv(text) == records


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_pairing_output_is_valid_and_complete(data):
    epochs = sorted(data.draw(st.lists(
        st.floats(min_value=0.0, max_value=100.0), max_size=10, unique=True)))
    rhcp = [ch(e, "G01", 40.0) for e in epochs]
    lhcp_epochs = sorted(data.draw(st.lists(
        st.floats(min_value=0.0, max_value=100.0), max_size=10, unique=True)))
    lhcp = [ch(e, "G01", 33.0) for e in lhcp_epochs]
    paired = ingest.pair_receiver_streams(rhcp, lhcp)
    # every RHCP record survives, keyed to its own epoch
    assert [p.epoch for p in paired] == epochs
    for p in paired:
        if p.lhcp_imputed:
            assert p.cn0_lhcp_dbhz == 25.0
            assert all(abs(e - p.epoch) > 0.5 for e in lhcp_epochs)
        else:
            assert min(abs(e - p.epoch) for e in lhcp_epochs) <= 0.5
