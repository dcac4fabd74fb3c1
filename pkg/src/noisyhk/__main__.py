"""Allow `python -m noisyhk`."""

from noisyhk.cli import main

if __name__ == "__main__":
    main()
