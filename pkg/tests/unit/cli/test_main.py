import sys

import pytest

from rewind.cli import configure_logging, main


@pytest.mark.unit
def test_command_tree(mocker):
    fire = mocker.patch("rewind.cli.main.fire.Fire")
    mocker.patch("rewind.cli.main.configure_logging")
    main.main()

    commands = fire.call_args[0][0]
    assert set(commands) == {"calc", "bench", "demo"}
    assert set(commands["calc"]) == {"availability", "budget", "replicas"}
    assert set(commands["bench"]) == {"recovery", "overhead"}
    assert set(commands["demo"]) == {"attack"}


@pytest.mark.unit
def test_configure_logging_routes_to_stderr(mocker):
    logger = mocker.patch("rewind.cli.logger")
    configure_logging("debug")

    logger.remove.assert_called_once_with()
    logger.add.assert_called_once_with(sys.stderr, level="DEBUG")
