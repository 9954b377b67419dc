from commands import cli
from settings import setup_logging


def main():
    setup_logging()
    cli()


if __name__ == "__main__":
    main()
