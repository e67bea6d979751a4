import fire
from loguru import logger

from ..bench import run_attack_demo
from ..reporting import emit
from . import configure_logging


def demo_attack(attack_requests: int = 100, honest_requests: int = 10000, guard_mode: str = "persistent",
                pretty: bool = False) -> None:
    """
    Runs a malicious client that crashes request handlers next to an honest client.

    Parameters
    ----------
    attack_requests: int
        CRASHME requests sent by the attacker.
    honest_requests: int
        GET/SET requests sent by the honest client.
    guard_mode: str
        per-call or persistent.
    pretty: bool
    """
    emit([run_attack_demo(attack_requests, honest_requests, guard_mode).serialize()], pretty)


COMMANDS = {
    "attack": demo_attack,
}


@logger.catch
def main():
    configure_logging()
    fire.Fire(COMMANDS)


if __name__ == "__main__":
    main()
