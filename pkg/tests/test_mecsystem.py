import pytest

from edgepool.domain import AppStatus, HostStatus, UserEquipment
from edgepool.engine import Engine, ms_to_us
from edgepool.errors import DuplicateRequest, NoSuchApp
from edgepool.mechost import HostLevel
from edgepool.mecsystem import DeliveryScheme, RequestStatus, SystemLevel
from edgepool.messages import AppAddress, AppRejected
from edgepool.netdelay import DelayProfile

from conftest import AOI, APP, make_local, make_vehicle

# request -> orchestrator leg (8 ms) + address -> UE leg (2.5 ms)
SETTLE_MS = 15


def make_system(engine, scheme=DeliveryScheme.FAR_EDGE, vehicles=3,
                local=None, cloud=None):
    host = HostLevel(engine, "mec-h-0", local or make_local(), DelayProfile())
    for i in range(vehicles):
        v = make_vehicle(i)
        v.status = HostStatus.REGISTERED
        host.add_remote(v)
    system = SystemLevel(engine, DelayProfile(), hosts=[(AOI, host)], ues={},
                         scheme=scheme, cloud=cloud or make_local("cloud"))
    inbox = []
    engine.register("ue-inbox", inbox.append)
    system._notify_target = lambda ue_id: "ue-inbox"
    return system, host, inbox


def add_ue(system, i, position=(0.0, 0.0)):
    ue = UserEquipment(f"ue-{i:05d}", position)
    system.ues[ue.ue_id] = ue
    return ue


def test_request_ends_running_with_address(engine):
    system, host, inbox = make_system(engine)
    ue = add_ue(system, 0)
    request = system.request_app(ue.ue_id, APP)
    assert request.status is RequestStatus.PENDING
    engine.run_until(ms_to_us(SETTLE_MS))
    assert request.status is RequestStatus.RUNNING
    assert inbox == [AppAddress(ue.ue_id, request.instance_id,
                                host.pool.remote[0].vehicle_id)]


def test_second_request_while_running_is_duplicate(engine):
    system, _, _ = make_system(engine)
    ue = add_ue(system, 0)
    system.request_app(ue.ue_id, APP)
    engine.run_until(ms_to_us(SETTLE_MS))
    ue.app_instance_id = system.requests["req-000000"].instance_id
    with pytest.raises(DuplicateRequest):
        system.request_app(ue.ue_id, APP)


def test_request_while_pending_is_duplicate(engine):
    system, _, _ = make_system(engine)
    ue = add_ue(system, 0)
    system.request_app(ue.ue_id, APP)
    with pytest.raises(DuplicateRequest):
        system.request_app(ue.ue_id, APP)


def test_flash_crowd_of_requests_all_run(engine):
    system, host, _ = make_system(engine, vehicles=40)
    for i in range(500):
        system.request_app(add_ue(system, i).ue_id, APP)
    engine.run_until(ms_to_us(SETTLE_MS))
    running = [r for r in system.requests.values()
               if r.status is RequestStatus.RUNNING]
    assert len(running) == 500
    assert len(host.apps) == 500


def test_request_out_of_every_aoi_is_rejected(engine):
    system, _, inbox = make_system(engine)
    ue = add_ue(system, 0, position=(99_999.0, 0.0))
    request = system.request_app(ue.ue_id, APP)
    engine.run_until(ms_to_us(SETTLE_MS))
    assert request.status is RequestStatus.REJECTED
    assert isinstance(inbox[0], AppRejected)


def test_rejection_for_capacity_is_terminal(engine):
    zero = make_local(capacity=APP.required)  # one slot in the whole system
    system, _, _ = make_system(engine, vehicles=0, local=zero)
    first = system.request_app(add_ue(system, 0).ue_id, APP)
    second = system.request_app(add_ue(system, 1).ue_id, APP)
    engine.run_until(ms_to_us(SETTLE_MS))
    assert first.status is RequestStatus.RUNNING
    assert second.status is RequestStatus.REJECTED


def test_every_request_ends_running_or_rejected(engine):
    cramped = make_local(capacity=APP.required + APP.required)
    system, _, _ = make_system(engine, vehicles=1, local=cramped)
    for i in range(30):
        system.request_app(add_ue(system, i).ue_id, APP)
    engine.run_until(ms_to_us(SETTLE_MS))
    terminal = {RequestStatus.RUNNING, RequestStatus.REJECTED}
    assert all(r.status in terminal for r in system.requests.values())


def test_terminate_restores_the_ledger_exactly(engine):
    system, host, _ = make_system(engine, vehicles=1)
    ue = add_ue(system, 0)
    system.request_app(ue.ue_id, APP)
    engine.run_until(ms_to_us(SETTLE_MS))
    vehicle = host.pool.remote[0]
    assert vehicle.available == vehicle.leased - APP.required
    ue.app_instance_id = system.requests["req-000000"].instance_id
    system.terminate_app(ue.ue_id)
    assert vehicle.available == vehicle.leased
    assert vehicle.apps == set()


def test_terminate_twice_raises(engine):
    system, _, _ = make_system(engine, vehicles=1)
    ue = add_ue(system, 0)
    system.request_app(ue.ue_id, APP)
    engine.run_until(ms_to_us(SETTLE_MS))
    ue.app_instance_id = system.requests["req-000000"].instance_id
    system.terminate_app(ue.ue_id)
    with pytest.raises(NoSuchApp):
        system.terminate_app(ue.ue_id)


def test_terminate_during_migration_waits_for_completion(engine):
    system, host, _ = make_system(engine, vehicles=1)
    host.on_migration_complete = system.on_migration_complete
    ue = add_ue(system, 0)
    system.request_app(ue.ue_id, APP)
    engine.run_until(ms_to_us(SETTLE_MS))
    instance_id = system.requests["req-000000"].instance_id
    ue.app_instance_id = instance_id
    app = host.apps[instance_id]

    host.remove_remote(host.pool.remote[0].vehicle_id)
    assert app.status is AppStatus.MIGRATING
    system.terminate_app(ue.ue_id)
    assert app.status is AppStatus.MIGRATING  # queued, not applied
    engine.run_until(ms_to_us(SETTLE_MS + 10))
    assert app.status is AppStatus.STOPPED
    local = host.pool.local
    assert local.apps == set()
    assert local.available == local.capacity


def test_ue_can_request_again_after_termination(engine):
    system, _, _ = make_system(engine, vehicles=1)
    ue = add_ue(system, 0)
    system.request_app(ue.ue_id, APP)
    engine.run_until(ms_to_us(SETTLE_MS))
    ue.app_instance_id = system.requests["req-000000"].instance_id
    system.terminate_app(ue.ue_id)
    request = system.request_app(ue.ue_id, APP)
    engine.run_until(ms_to_us(2 * SETTLE_MS))
    assert request.status is RequestStatus.RUNNING


def test_cloud_scheme_places_on_the_datacenter(engine):
    cloud = make_local("cloud")
    system, host, inbox = make_system(engine, scheme=DeliveryScheme.CLOUD,
                                      vehicles=0, cloud=cloud)
    ue = add_ue(system, 0)
    system.request_app(ue.ue_id, APP)
    engine.run_until(ms_to_us(SETTLE_MS))
    assert inbox[0].host_id == "cloud"
    assert cloud.available == cloud.capacity - APP.required
    ue.app_instance_id = inbox[0].instance_id
    system.terminate_app(ue.ue_id)
    assert cloud.available == cloud.capacity


def test_edge_scheme_places_on_local_infrastructure(engine):
    system, host, inbox = make_system(engine, scheme=DeliveryScheme.EDGE,
                                      vehicles=2)
    system.request_app(add_ue(system, 0).ue_id, APP)
    engine.run_until(ms_to_us(SETTLE_MS))
    assert inbox[0].host_id == host.pool.local.host_id
    assert all(v.apps == set() for v in host.pool.remote)
