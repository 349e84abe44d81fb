"""D-bar reconstruction of a 2-D Schrodinger potential at fixed positive energy."""
