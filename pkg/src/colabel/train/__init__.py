"""Training loops: the label-correction trainers and the baseline methods."""
