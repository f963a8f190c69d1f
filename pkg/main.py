import sys
import os
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from src.cli.commands import main as cli_main


def main():
    return cli_main(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
