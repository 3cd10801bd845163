import sys

from multiband_bcs.cli import run


if __name__ == '__main__':
    sys.exit(run(sys.argv[1:]))
