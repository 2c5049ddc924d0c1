import pytest
from hypothesis import given, strategies as st

from edgepool.domain import (
    AppDescriptor,
    AppInstance,
    AreaOfInterest,
    ResourceCapacity,
    Zone,
    ZERO_CAPACITY,
    capacity_fits,
    inside_aoi,
    update_zone_presence,
    zone_crossings,
)

caps = st.builds(ResourceCapacity,
                 st.integers(0, 10**9), st.integers(0, 10**12),
                 st.integers(0, 10**12))


def test_negative_capacity_rejected():
    with pytest.raises(ValueError):
        ResourceCapacity(-1, 0, 0)


def test_capacity_fits_zero_requirement():
    assert capacity_fits(ZERO_CAPACITY, ResourceCapacity(1, 1, 1))
    assert capacity_fits(ZERO_CAPACITY, ZERO_CAPACITY)


def test_capacity_fits_single_component_violation():
    assert not capacity_fits(ResourceCapacity(10, 1, 1), ResourceCapacity(9, 9, 9))


def test_capacity_fits_boundary_inclusive():
    c = ResourceCapacity(3, 4, 5)
    assert capacity_fits(c, c)


@given(caps, caps)
def test_capacity_add_then_subtract_round_trips(a, b):
    assert (a + b) - b == a


@given(caps, caps)
def test_fits_iff_subtraction_stays_valid(required, available):
    if capacity_fits(required, available):
        rest = available - required
        assert rest.cpu >= 0 and rest.ram >= 0 and rest.disk >= 0
    else:
        # A debit that would go negative is a ledger fault, not a value.
        with pytest.raises(ValueError):
            available - required


def test_aoi_needs_a_zone():
    with pytest.raises(ValueError):
        AreaOfInterest("empty", ())


def test_inside_aoi_center_and_boundary():
    aoi = AreaOfInterest("a", (Zone("z", (0.0, 0.0), 100.0),))
    assert inside_aoi((0.0, 0.0), aoi)
    assert inside_aoi((100.0, 0.0), aoi)  # closed boundary
    assert not inside_aoi((100.0001, 0.0), aoi)


def test_inside_aoi_any_zone_counts():
    aoi = AreaOfInterest("a", (Zone("z1", (0.0, 0.0), 10.0),
                               Zone("z2", (1000.0, 0.0), 10.0)))
    assert inside_aoi((1005.0, 0.0), aoi)
    assert not inside_aoi((500.0, 0.0), aoi)


def test_app_state_size_is_bounded():
    app = AppInstance("app-0", "ue-0",
                      AppDescriptor("t", ZERO_CAPACITY, state_size=4))
    with pytest.raises(ValueError):
        app.set_state(b"12345")
    app.set_state(b"1234")
    assert app.app_state == b"1234"


def test_warning_zone_crossing_updates_state_once_per_crossing():
    zone = Zone("wz", (0.0, 0.0), 10.0)
    app = AppInstance("app-0", "ue-0", AppDescriptor("t", ZERO_CAPACITY),
                      zone=zone, last_inside=False)
    assert update_zone_presence(app, (20.0, 0.0)) is False   # still outside
    assert update_zone_presence(app, (5.0, 0.0)) is True     # entered
    assert update_zone_presence(app, (9.0, 0.0)) is False    # stays inside
    assert update_zone_presence(app, (11.0, 0.0)) is True    # left
    assert zone_crossings(app.app_state) == 2
    assert len(app.app_state) <= app.descriptor.state_size


def test_warning_zone_state_stays_under_30_bytes():
    zone = Zone("wz", (0.0, 0.0), 1.0)
    app = AppInstance("app-0", "ue-0", AppDescriptor("t", ZERO_CAPACITY),
                      zone=zone)
    for i in range(1000):
        update_zone_presence(app, ((i % 2) * 5.0, 0.0))
    assert len(app.app_state) <= 30


def test_reward_value_must_be_non_negative():
    from edgepool.domain import RewardOffer
    with pytest.raises(ValueError):
        RewardOffer("r", "a", -1.0)
