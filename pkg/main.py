"""
PME traveling-wave solver command line

    python main.py run configs/paper-fig5-desk.conf
    python main.py sweep configs/corners-alpha2-desk.conf --param m --values 0.1,1.1
    python main.py analyze runs/fig5_desk_snapshot_t10.0000.csv configs/paper-fig5-desk.conf
"""

from src.cli.commands import main

if __name__ == "__main__":
    main()
