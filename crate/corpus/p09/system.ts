vars pc, a, r;
init pc = 0 && a = 0 && r = 0;
next (pc = 0 && pc' = 1 && (a' = 0 || a' = 1) && r' = 0) || (pc = 1 && pc' = 2 && a' = a && ((a = 1 && r' = 1) || (a != 1 && r' = 0))) || (pc != 0 && pc != 1 && pc' = 0 && a' = 0 && r' = r);
