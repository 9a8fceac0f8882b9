def add_up_40(limit):
    amount = 0
    for i in range(limit):
        amount = amount + i
    return amount

print(add_up_40(9))
