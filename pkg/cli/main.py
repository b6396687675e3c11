#!/usr/bin/env python
"""Console entry point: ``wqed <subcommand> ...`` runs ``manage.py waveguide <subcommand> ...``."""
import os
import sys


def main(argv=None):
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'wqed.settings')
    from django.core.management import execute_from_command_line

    argv = sys.argv[1:] if argv is None else list(argv)
    execute_from_command_line(['wqed', 'waveguide'] + argv)


if __name__ == '__main__':
    main()
