import fire
from loguru import logger

from ..availability import (availability, downtime_budget, meets_target, nines, recovery_budget, replica_model,
                            replicas_needed)
from ..models import AvailabilityModel
from ..reporting import emit
from . import configure_logging


def calc_availability(faults: float, recovery: float, target: float = 0.99999, pretty: bool = False) -> None:
    """
    Availability of a service that loses `recovery` seconds on each of `faults` yearly faults.

    Parameters
    ----------
    faults: float
        Faults per year.
    recovery: float
        Seconds of downtime per fault.
    target: float
        Availability the service must reach.
    pretty: bool
        Print a table instead of JSON lines.
    """
    model = AvailabilityModel(faults_per_year=faults, recovery_seconds=recovery, target_availability=target)
    emit([{
        "report": "availability",
        "faults_per_year": faults,
        "recovery_seconds": recovery,
        "availability": availability(model),
        "nines": nines(availability(model)),
        "target": target,
        "meets_target": meets_target(model),
        "downtime_budget_s": downtime_budget(target),
    }], pretty)


def calc_budget(target: float = 0.99999, recovery: float = 3.5e-6, pretty: bool = False) -> None:
    """
    Recoveries per year that fit the downtime budget of `target`.

    Parameters
    ----------
    target: float
    recovery: float
        Seconds per recovery.
    pretty: bool
    """
    emit([{
        "report": "budget",
        "target": target,
        "recovery_seconds": recovery,
        "max_recoveries_per_year": recovery_budget(target, recovery),
        "downtime_budget_s": downtime_budget(target),
    }], pretty)


def calc_replicas(faults: float = 3, target: float = 0.99999, restart: float = 120.0, rewind: float = 3.5e-6,
                  replicas: int = 0, pretty: bool = False) -> None:
    """
    Replicas needed to reach `target` when recovering by restart and when recovering by rewind.

    Parameters
    ----------
    faults: float
        Faults per year of one node.
    target: float
    restart: float
        Seconds per restart.
    rewind: float
        Seconds per rewind.
    replicas: int
        When positive, also report the availability of that many restart-based replicas.
    pretty: bool
    """
    records = []
    for recovery_kind, seconds in (("restart", restart), ("rewind", rewind)):
        single = availability(AvailabilityModel(faults_per_year=faults, recovery_seconds=seconds,
                                                target_availability=target))
        records.append({
            "report": "replicas",
            "recovery": recovery_kind,
            "recovery_seconds": seconds,
            "single_node_availability": single,
            "target": target,
            "replicas_needed": replicas_needed(single, target),
        })
        if replicas > 0:
            records[-1]["availability_with_replicas"] = replica_model(single, replicas)
    emit(records, pretty)


COMMANDS = {
    "availability": calc_availability,
    "budget": calc_budget,
    "replicas": calc_replicas,
}


@logger.catch
def main():
    configure_logging()
    fire.Fire(COMMANDS)


if __name__ == "__main__":
    main()
