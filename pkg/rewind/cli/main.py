import fire
from loguru import logger

from . import bench, calc, configure_logging, demo


@logger.catch
def main():
    configure_logging()
    fire.Fire({
        "calc": calc.COMMANDS,
        "bench": bench.COMMANDS,
        "demo": demo.COMMANDS,
    }, name="rewind")


if __name__ == "__main__":
    main()
