vars pc, a, r;
init pc = 0 && a = 0 && r = 0;
next (pc = 0 && pc' = 1 && r' = 0 && a' >= -2 && a' <= 2) || (pc != 0 && pc' = 0 && a' = a && r' = 1);
